// Pure render functions: every page is an HTML string built verbatim from
// gateway responses. Nothing here recomputes results; the numbers on screen
// are the numbers the API returned.

import { AuditDoc, ChainDoc, CommitmentDoc, StatusDoc, TallyDoc, VerifyDoc } from "./api";
import { VoterSession } from "./session";

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderBallotPage(session: VoterSession, status: StatusDoc): string {
  const phase =
    status.now < status.voting_open
      ? "registration"
      : status.now < status.cutoff
        ? "voting open"
        : "closed";
  const candidates = status.candidates
    .map((name, i) => `<li data-choice="${i}">${esc(name)}</li>`)
    .join("");
  return `<section class="ballot">
<h1>${esc(status.election_id)}</h1>
<p class="phase">${phase}</p>
<p class="window">voting ${status.voting_open} – ${status.cutoff}</p>
<p class="ids">voter id ${session.maskedVid()} · ballot ${session.maskedBid()}</p>
<ol class="candidates">${candidates}</ol>
</section>`;
}

export function renderConfirmation(status: string, blockHeight: number | null): string {
  const inclusion =
    blockHeight !== null ? `included in block ${blockHeight}` : "waiting for the next block";
  return `<div class="confirmation">vote ${esc(status)}; ${inclusion}</div>`;
}

export function renderErrorBanner(reason: string): string {
  const hint =
    reason === "RevokedBallot" ? " — your ballot was revoked; request a new one" : "";
  return `<div class="banner error" data-reason="${esc(reason)}">${esc(reason)}${hint}</div>`;
}

export function renderExplorer(chain: ChainDoc, commitments: CommitmentDoc[]): string {
  const rows = chain.blocks
    .map((b) => {
      const approvals = b.endorsements.filter(([, v]) => v === "approve").length;
      return `<tr>
<td class="height">${b.height}</td>
<td class="hash">${b.body_hash.slice(0, 12)}</td>
<td class="votes">${b.votes.length}</td>
<td class="miner">${b.miner_id}</td>
<td class="endorsements">${approvals}/${b.endorsements.length}</td>
</tr>`;
    })
    .join("\n");
  const commitmentRows = commitments
    .map(
      (c) =>
        `<tr class="${c.status}"><td>${c.digest.slice(0, 12)}</td><td>${c.status}</td></tr>`,
    )
    .join("\n");
  return `<section class="explorer">
<table class="blocks"><tbody>
${rows}
</tbody></table>
<table class="commitments"><tbody>
${commitmentRows}
</tbody></table>
</section>`;
}

export function renderTallyPage(tally: TallyDoc, candidates: string[]): string {
  const rows = candidates
    .map(
      (name, i) =>
        `<tr><td>${esc(name)}</td><td class="count">${tally.counts[String(i)]}</td></tr>`,
    )
    .join("\n");
  const rejects = tally.rejected
    .map((r) => `<li>block ${r.height} #${r.index}: ${esc(r.reason)}</li>`)
    .join("");
  return `<section class="tally">
<table><tbody>
${rows}
</tbody></table>
<p class="totals">cast ${tally.total_cast} · counted ${tally.total_counted}</p>
<ul class="rejected">${rejects}</ul>
</section>`;
}

export function renderVerifyPage(result: VerifyDoc): string {
  if (!result.found) {
    return `<section class="verify not-found"><p>not found</p></section>`;
  }
  const rows = result.locations
    .map((l) => {
      const state =
        l.counted === null ? "recorded" : l.counted ? "recorded &amp; counted" : "recorded, not counted";
      const cls = l.counted ? "counted" : l.counted === null ? "pending" : "excluded";
      return `<li class="${cls}">block ${l.height} #${l.index}: ${state}</li>`;
    })
    .join("");
  return `<section class="verify found"><ul>${rows}</ul></section>`;
}

export function renderAuditPage(audit: AuditDoc): string {
  const findings = audit.findings.map((f) => `<li>${esc(f)}</li>`).join("");
  return `<section class="audit ${audit.findings.length ? "dirty" : "clean"}">
<p>chain ok: ${audit.chain_ok}</p>
<p>recount matches: ${audit.recount_matches_announced}</p>
<p>commitments: ${audit.commitment_check.valid} valid / ${audit.commitment_check.invalid} invalid</p>
<p>signatures: ${audit.signature_check.pass} pass / ${audit.signature_check.fail} fail</p>
<p>anonymity scan clean: ${audit.anonymity_scan_clean}</p>
<ul class="findings">${findings}</ul>
</section>`;
}
