// Local voter session: credential, identifiers, and the one-time signing key.
// Secrets live only in the injected storage (in-memory by default) and leave
// the client only inside signed vote submissions. clear() wipes everything.

import { OtsKeyPair, bytesToHex, hexToBytes, sha256 } from "./crypto";

export interface SessionStorage {
  get(key: string): string | null;
  set(key: string, value: string): void;
  remove(key: string): void;
}

export class MemoryStorage implements SessionStorage {
  private map = new Map<string, string>();
  get(key: string) {
    return this.map.get(key) ?? null;
  }
  set(key: string, value: string) {
    this.map.set(key, value);
  }
  remove(key: string) {
    this.map.delete(key);
  }
}

interface SessionData {
  credential: string | null;
  vid: string | null;
  bid: string | null;
  keypair: { secret: string; used: boolean } | null;
}

const KEY = "qbvote-session";

export class VoterSession {
  private data: SessionData;

  constructor(private storage: SessionStorage = new MemoryStorage()) {
    const raw = storage.get(KEY);
    this.data = raw
      ? JSON.parse(raw)
      : { credential: null, vid: null, bid: null, keypair: null };
  }

  private save() {
    this.storage.set(KEY, JSON.stringify(this.data));
  }

  get credential() {
    return this.data.credential;
  }
  get vid() {
    return this.data.vid;
  }
  get bid() {
    return this.data.bid;
  }

  setRegistration(credential: string, vid: string, kp: OtsKeyPair) {
    this.data.credential = credential;
    this.data.vid = vid;
    this.data.keypair = serializeKeyPair(kp);
    this.save();
  }

  setBallot(bid: string, kp?: OtsKeyPair) {
    this.data.bid = bid;
    if (kp) this.data.keypair = serializeKeyPair(kp);
    this.save();
  }

  takeKeyPair(): OtsKeyPair {
    if (!this.data.keypair) throw new Error("no signing key in session");
    return deserializeKeyPair(this.data.keypair);
  }

  markKeyUsed() {
    if (this.data.keypair) {
      this.data.keypair.used = true;
      this.save();
    }
  }

  /** Identifier shown in the UI: first 8 hex chars, never the full secret. */
  maskedVid(): string {
    return this.data.vid ? this.data.vid.slice(0, 8) + "…" : "—";
  }

  maskedBid(): string {
    return this.data.bid ? this.data.bid.slice(0, 8) + "…" : "—";
  }

  clear() {
    this.data = { credential: null, vid: null, bid: null, keypair: null };
    this.storage.remove(KEY);
  }
}

function serializeKeyPair(kp: OtsKeyPair): { secret: string; used: boolean } {
  let secret = "";
  for (const s of kp.secret) secret += bytesToHex(s);
  return { secret, used: kp.used };
}

function deserializeKeyPair(d: { secret: string; used: boolean }): OtsKeyPair {
  const raw = hexToBytes(d.secret);
  const secret: Uint8Array[] = [];
  const pub: Uint8Array[] = [];
  for (let i = 0; i < 512; i++) {
    const s = raw.subarray(32 * i, 32 * i + 32);
    secret.push(s);
    pub.push(sha256(s));
  }
  return { secret, public: pub, used: d.used };
}
