// Typed client for the gateway HTTP/JSON API. The transport is injectable so
// tests can run against an in-process fixture gateway; the default transport
// uses fetch against a base URL.

export interface DeliveryPackage {
  ciphertext: string;
  key_offset: number;
  key_bits: string;
  va_signature: string;
  va_public: string;
  qkd_session: Record<string, unknown>;
}

export interface VoteBody {
  pair_digest: string;
  choice: number;
  cast_at: number;
  signature: string;
  signer_public: string;
}

export interface VoteResponse {
  status: "committed" | "pending";
  block_height: number | null;
}

export interface VoteDoc {
  pair_digest: string;
  choice: number;
  cast_at: number;
  signature: string;
  signer_public: string;
}

export interface BlockDoc {
  height: number;
  prev_hash: string;
  body_hash: string;
  miner_id: number;
  created_at: number;
  endorsements: [number, string][];
  votes: VoteDoc[];
}

export interface ChainDoc {
  config_digest: string;
  blocks: BlockDoc[];
}

export interface CommitmentDoc {
  digest: string;
  ots_public_digest: string;
  status: "active" | "revoked";
  published_at: number;
  revoked_at: number | null;
}

export interface VerifyLocation {
  height: number;
  index: number;
  counted: boolean | null;
}

export interface VerifyDoc {
  found: boolean;
  locations: VerifyLocation[];
}

export interface TallyDoc {
  counts: Record<string, number>;
  counted: [string, number][];
  rejected: { height: number; index: number; pair_digest: string; reason: string }[];
  total_cast: number;
  total_counted: number;
  chain_tip_hash: string;
  commitments_hash: string;
}

export interface AuditDoc {
  chain_ok: boolean;
  first_bad_height: number | null;
  recount_matches_announced: boolean;
  commitment_check: { valid: number; invalid: number };
  signature_check: { pass: number; fail: number };
  anonymity_scan_clean: boolean;
  findings: string[];
}

export interface StatusDoc {
  election_id: string;
  candidates: string[];
  now: number;
  registration_open: number;
  voting_open: number;
  cutoff: number;
  chain_height: number;
  chain_tip_hash: string;
  commitments: number;
  pending_votes: number;
}

export class ApiError extends Error {
  constructor(public code: number, public reason: string) {
    super(reason);
  }
}

export type Transport = (
  method: "GET" | "POST",
  path: string,
  body?: unknown,
  params?: Record<string, string>,
) => Promise<{ status: number; body: any }>;

export function fetchTransport(baseUrl: string): Transport {
  return async (method, path, body, params) => {
    const url = new URL(baseUrl.replace(/\/$/, "") + path);
    for (const [k, v] of Object.entries(params ?? {})) {
      url.searchParams.set(k, v);
    }
    const resp = await fetch(url, {
      method,
      headers: body !== undefined ? { "content-type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    return { status: resp.status, body: await resp.json() };
  };
}

export class ApiClient {
  constructor(private transport: Transport) {}

  private async call(
    method: "GET" | "POST",
    path: string,
    body?: unknown,
    params?: Record<string, string>,
  ): Promise<any> {
    const resp = await this.transport(method, path, body, params);
    if (resp.status >= 400) {
      throw new ApiError(resp.body?.code ?? resp.status, resp.body?.reason ?? "Unknown");
    }
    return resp.body;
  }

  register(credential: string, otsPublicDigest: string): Promise<{ package: DeliveryPackage }> {
    return this.call("POST", "/register", { credential, ots_public_digest: otsPublicDigest });
  }

  ballot(vid: string): Promise<{ package: DeliveryPackage }> {
    return this.call("POST", "/ballot", { vid });
  }

  reballot(vid: string, otsPublicDigest: string): Promise<{ package: DeliveryPackage }> {
    return this.call("POST", "/reballot", { vid, ots_public_digest: otsPublicDigest });
  }

  vote(body: VoteBody): Promise<VoteResponse> {
    return this.call("POST", "/vote", body);
  }

  chain(): Promise<ChainDoc> {
    return this.call("GET", "/chain");
  }

  block(height: number): Promise<BlockDoc> {
    return this.call("GET", `/block/${height}`);
  }

  commitments(): Promise<CommitmentDoc[]> {
    return this.call("GET", "/commitments");
  }

  verify(vid: string, bid: string): Promise<VerifyDoc> {
    return this.call("GET", "/verify", undefined, { vid, bid });
  }

  tally(): Promise<TallyDoc> {
    return this.call("GET", "/tally");
  }

  audit(): Promise<AuditDoc> {
    return this.call("GET", "/audit");
  }

  status(): Promise<StatusDoc> {
    return this.call("GET", "/status");
  }
}
