// Display fidelity: every number on a rendered page equals the
// corresponding field of a real gateway response, captured in
// fixtures/election.json from an actual election run.

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { VoterSession } from "../src/session";
import {
  renderAuditPage,
  renderBallotPage,
  renderConfirmation,
  renderExplorer,
  renderTallyPage,
  renderVerifyPage,
} from "../src/views";

const fixture = JSON.parse(
  readFileSync(new URL("./fixtures/election.json", import.meta.url), "utf-8"),
);

function cells(html: string, cls: string): string[] {
  const re = new RegExp(`class="${cls}"[^>]*>([^<]*)<`, "g");
  return Array.from(html.matchAll(re), (m) => m[1]);
}

describe("tally page", () => {
  const html = renderTallyPage(fixture.tally, fixture.status.candidates);

  it("shows each candidate count exactly as the API returned it", () => {
    const shown = cells(html, "count").map(Number);
    const api = fixture.status.candidates.map(
      (_: string, i: number) => fixture.tally.counts[String(i)],
    );
    expect(shown).toEqual(api);
  });

  it("totals equal the API fields", () => {
    expect(html).toContain(`cast ${fixture.tally.total_cast}`);
    expect(html).toContain(`counted ${fixture.tally.total_counted}`);
  });

  it("every rejection reason is listed verbatim", () => {
    for (const r of fixture.tally.rejected) {
      expect(html).toContain(`block ${r.height} #${r.index}: ${r.reason}`);
    }
  });
});

describe("explorer page", () => {
  const html = renderExplorer(fixture.chain, fixture.commitments);

  it("one row per block with API-exact height, vote count, miner", () => {
    const heights = cells(html, "height").map(Number);
    const votes = cells(html, "votes").map(Number);
    const miners = cells(html, "miner").map(Number);
    expect(heights).toEqual(fixture.chain.blocks.map((b: any) => b.height));
    expect(votes).toEqual(fixture.chain.blocks.map((b: any) => b.votes.length));
    expect(miners).toEqual(fixture.chain.blocks.map((b: any) => b.miner_id));
  });

  it("endorsement tallies match the API lists", () => {
    const shown = cells(html, "endorsements");
    const api = fixture.chain.blocks.map((b: any) => {
      const approvals = b.endorsements.filter(([, v]: [number, string]) => v === "approve").length;
      return `${approvals}/${b.endorsements.length}`;
    });
    expect(shown).toEqual(api);
  });

  it("hash prefixes come from the block body hashes", () => {
    for (const b of fixture.chain.blocks) {
      expect(html).toContain(b.body_hash.slice(0, 12));
    }
  });

  it("commitment statuses render verbatim, revocations visible", () => {
    for (const c of fixture.commitments) {
      expect(html).toContain(`<tr class="${c.status}"><td>${c.digest.slice(0, 12)}</td>`);
    }
    const revoked = fixture.commitments.filter((c: any) => c.status === "revoked");
    expect(revoked.length).toBeGreaterThan(0); // the fixture includes a re-ballot
  });
});

describe("ballot page", () => {
  it("shows the election window, candidates, and masked ids only", () => {
    const session = new VoterSession();
    session.setRegistration("x", fixture.revoter_secrets.vid, {
      secret: [],
      public: [],
      used: false,
    } as any);
    session.setBallot(fixture.revoter_secrets.bid);
    const html = renderBallotPage(session, fixture.status);
    expect(html).toContain(fixture.status.election_id);
    expect(html).toContain(`voting ${fixture.status.voting_open} – ${fixture.status.cutoff}`);
    for (const name of fixture.status.candidates) {
      expect(html).toContain(`>${name}<`);
    }
    expect(html).not.toContain(fixture.revoter_secrets.vid);
    expect(html).not.toContain(fixture.revoter_secrets.bid);
    expect(html).toContain(fixture.revoter_secrets.vid.slice(0, 8) + "…");
  });
});

describe("verify page", () => {
  it("renders the API locations field-for-field", () => {
    const html = renderVerifyPage(fixture.verify_example.response);
    for (const l of fixture.verify_example.response.locations) {
      expect(html).toContain(`block ${l.height} #${l.index}`);
    }
    expect(html).toContain("recorded &amp; counted");
  });

  it("distinct not-found state", () => {
    const html = renderVerifyPage({ found: false, locations: [] });
    expect(html).toContain("not-found");
  });
});

describe("audit page", () => {
  it("mirrors every audit field", () => {
    const html = renderAuditPage(fixture.audit);
    expect(html).toContain(`chain ok: ${fixture.audit.chain_ok}`);
    expect(html).toContain(`recount matches: ${fixture.audit.recount_matches_announced}`);
    expect(html).toContain(
      `commitments: ${fixture.audit.commitment_check.valid} valid / ${fixture.audit.commitment_check.invalid} invalid`,
    );
    expect(html).toContain(
      `signatures: ${fixture.audit.signature_check.pass} pass / ${fixture.audit.signature_check.fail} fail`,
    );
    expect(html).toContain('class="audit clean"');
  });
});

describe("confirmation", () => {
  it("shows inclusion height when committed", () => {
    expect(renderConfirmation("committed", 3)).toContain("included in block 3");
  });
  it("shows pending state without a height", () => {
    expect(renderConfirmation("pending", null)).toContain("waiting for the next block");
  });
});
