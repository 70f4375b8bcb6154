import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { seededRandom } from "../src/crypto";
import { MemoryStorage, VoterSession } from "../src/session";
import {
  ballotFlow,
  castFlow,
  reballotFlow,
  registerFlow,
  verifyFlow,
} from "../src/flows";
import { renderErrorBanner, renderVerifyPage } from "../src/views";
import { FixtureGateway } from "./fixture_gateway";

function setup(seed = 1) {
  const gw = new FixtureGateway(
    {
      electionId: "ui-test",
      candidates: ["ann", "ben", "cho"],
      registrationOpen: 0,
      votingOpen: 1_000,
      cutoff: 60_000,
      miners: 5,
    },
    seed,
  );
  const client = new ApiClient(gw.transport);
  const session = new VoterSession();
  return { gw, client, session };
}

async function registered(seed = 1) {
  const ctx = setup(seed);
  ctx.gw.now = 10;
  const reg = await registerFlow(ctx.client, ctx.session, "alice@example.org", seededRandom(40 + seed));
  expect(reg.ok).toBe(true);
  ctx.gw.now = 2_000;
  const bal = await ballotFlow(ctx.client, ctx.session);
  expect(bal.ok).toBe(true);
  return ctx;
}

describe("cast flow", () => {
  it("signs client-side, posts, and reports block inclusion", async () => {
    const { gw, client, session } = await registered();
    gw.now = 3_000;
    const result = await castFlow(client, session, 1, 3_000);
    expect(result).toMatchObject({ ok: true, status: "committed", blockHeight: 1 });

    gw.now = 60_001;
    const tally = await client.tally();
    expect(tally.counts).toEqual({ "0": 0, "1": 1, "2": 0 });
  });

  it("surfaces AfterCutoff verbatim", async () => {
    const { gw, client, session } = await registered(2);
    gw.now = 60_000 + 30_000;
    const result = await castFlow(client, session, 0, gw.now);
    expect(result).toEqual({ ok: false, reason: "AfterCutoff" });
    if (!result.ok) {
      expect(renderErrorBanner(result.reason)).toContain('data-reason="AfterCutoff"');
    }
  });

  it("surfaces RevokedBallot when casting with a stale ballot", async () => {
    const { gw, client, session } = await registered(3);
    // the ballot gets revoked out from under this session (e.g. from
    // another device); the local copy is now stale
    await client.reballot(session.vid!, "00".repeat(32));
    gw.now = 3_000;
    const result = await castFlow(client, session, 0, 3_000);
    expect(result).toEqual({ ok: false, reason: "RevokedBallot" });
    if (!result.ok) {
      expect(renderErrorBanner(result.reason)).toContain("request a new one");
    }
  });

  it("refuses a second cast with the spent key", async () => {
    const { gw, client, session } = await registered(4);
    gw.now = 3_000;
    await castFlow(client, session, 1, 3_000);
    const again = await castFlow(client, session, 2, 3_100);
    expect(again).toEqual({ ok: false, reason: "KeyAlreadyUsed" });
  });
});

describe("re-ballot flow (coercion)", () => {
  it("revokes the old ballot and the free re-vote is the one counted", async () => {
    const { gw, client, session } = await registered(5);
    gw.now = 3_000;
    const coerced = await castFlow(client, session, 0, 3_000);
    expect(coerced.ok).toBe(true);

    gw.now = 4_000;
    const re = await reballotFlow(client, session, seededRandom(99));
    expect(re.ok).toBe(true);

    const commitments = await client.commitments();
    expect(commitments.map((c) => c.status)).toEqual(["revoked", "active"]);

    gw.now = 5_000;
    const free = await castFlow(client, session, 2, 5_000);
    expect(free.ok).toBe(true);

    gw.now = 60_001;
    const tally = await client.tally();
    expect(tally.counts).toEqual({ "0": 0, "1": 0, "2": 1 });
    expect(tally.rejected.map((r) => r.reason)).toEqual(["RevokedBallot"]);

    const check = await verifyFlow(client, session.vid!, session.bid!);
    expect(check.ok).toBe(true);
    if (check.ok) {
      expect(check.result.locations).toEqual([
        { height: 2, index: 0, counted: true },
      ]);
    }
  });

  it("re-ballot without a ballot reports NoActiveBallot", async () => {
    const { gw, client, session } = setup(6);
    gw.now = 10;
    await registerFlow(client, session, "bob@example.org", seededRandom(6));
    const result = await reballotFlow(client, session, seededRandom(7));
    expect(result).toEqual({ ok: false, reason: "NoActiveBallot" });
  });
});

describe("verify flow", () => {
  it("unknown pair renders not found", async () => {
    const { client } = await registered(7);
    const result = await verifyFlow(client, "ab".repeat(32), "cd".repeat(32));
    expect(result.ok).toBe(true);
    if (result.ok) {
      expect(result.result.found).toBe(false);
      expect(renderVerifyPage(result.result)).toContain("not found");
    }
  });

  it("counted vote renders recorded & counted with block height", async () => {
    const { gw, client, session } = await registered(8);
    gw.now = 3_000;
    await castFlow(client, session, 1, 3_000);
    gw.now = 60_001;
    const result = await verifyFlow(client, session.vid!, session.bid!);
    expect(result.ok).toBe(true);
    if (result.ok) {
      const html = renderVerifyPage(result.result);
      expect(html).toContain("recorded &amp; counted");
      expect(html).toContain("block 1");
    }
  });
});

describe("session secrecy", () => {
  it("clearing the session leaves nothing recoverable from storage", async () => {
    const storage = new MemoryStorage();
    const gw = new FixtureGateway(
      {
        electionId: "ui-test",
        candidates: ["ann", "ben"],
        registrationOpen: 0,
        votingOpen: 1_000,
        cutoff: 60_000,
        miners: 3,
      },
      9,
    );
    const client = new ApiClient(gw.transport);
    const session = new VoterSession(storage);
    gw.now = 10;
    await registerFlow(client, session, "carol@example.org", seededRandom(9));
    const vid = session.vid!;
    expect(storage.get("qbvote-session")).toContain(vid);

    session.clear();
    expect(storage.get("qbvote-session")).toBeNull();
    const reloaded = new VoterSession(storage);
    expect(reloaded.vid).toBeNull();
    expect(reloaded.maskedVid()).toBe("—");
  });

  it("the UI only ever shows masked identifiers", async () => {
    const { session } = await registered(10);
    expect(session.maskedVid()).toHaveLength(9);
    expect(session.maskedVid()).not.toBe(session.vid);
    expect(session.vid!.startsWith(session.maskedVid().slice(0, 8))).toBe(true);
  });
});
