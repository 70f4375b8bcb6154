// Client-side crypto: SHA-256, Lamport one-time signatures, and one-time-pad
// decryption for delivery packages. Byte formats match the gateway exactly:
// hex strings on the wire, big-endian fixed-width integers in signed messages.

const K = [
  0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
  0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
  0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
  0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
  0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
  0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
  0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
  0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
  0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
  0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
  0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
];

function rotr(x: number, n: number): number {
  return (x >>> n) | (x << (32 - n));
}

export function sha256(data: Uint8Array): Uint8Array {
  const len = data.length;
  const bitLen = len * 8;
  const padded = new Uint8Array(((len + 8) >> 6 << 6) + 64);
  padded.set(data);
  padded[len] = 0x80;
  const dv = new DataView(padded.buffer);
  dv.setUint32(padded.length - 8, Math.floor(bitLen / 0x100000000));
  dv.setUint32(padded.length - 4, bitLen >>> 0);

  const h = [
    0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c,
    0x1f83d9ab, 0x5be0cd19,
  ];
  const w = new Array<number>(64);
  for (let off = 0; off < padded.length; off += 64) {
    for (let i = 0; i < 16; i++) w[i] = dv.getUint32(off + 4 * i);
    for (let i = 16; i < 64; i++) {
      const s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >>> 3);
      const s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >>> 10);
      w[i] = (w[i - 16] + s0 + w[i - 7] + s1) >>> 0;
    }
    let [a, b, c, d, e, f, g, hh] = h;
    for (let i = 0; i < 64; i++) {
      const S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const ch = (e & f) ^ (~e & g);
      const t1 = (hh + S1 + ch + K[i] + w[i]) >>> 0;
      const S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const maj = (a & b) ^ (a & c) ^ (b & c);
      const t2 = (S0 + maj) >>> 0;
      hh = g; g = f; f = e; e = (d + t1) >>> 0;
      d = c; c = b; b = a; a = (t1 + t2) >>> 0;
    }
    h[0] = (h[0] + a) >>> 0; h[1] = (h[1] + b) >>> 0;
    h[2] = (h[2] + c) >>> 0; h[3] = (h[3] + d) >>> 0;
    h[4] = (h[4] + e) >>> 0; h[5] = (h[5] + f) >>> 0;
    h[6] = (h[6] + g) >>> 0; h[7] = (h[7] + hh) >>> 0;
  }
  const out = new Uint8Array(32);
  const odv = new DataView(out.buffer);
  for (let i = 0; i < 8; i++) odv.setUint32(4 * i, h[i]);
  return out;
}

export function hexToBytes(hex: string): Uint8Array {
  if (hex.length % 2 !== 0) throw new Error("odd-length hex");
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}

export function bytesToHex(data: Uint8Array): string {
  return Array.from(data, (b) => b.toString(16).padStart(2, "0")).join("");
}

function concat(parts: Uint8Array[]): Uint8Array {
  const out = new Uint8Array(parts.reduce((n, p) => n + p.length, 0));
  let off = 0;
  for (const p of parts) {
    out.set(p, off);
    off += p.length;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Randomness: injectable so tests can be deterministic.
// ---------------------------------------------------------------------------

export type RandomSource = (n: number) => Uint8Array;

export const defaultRandom: RandomSource = (n) => {
  const out = new Uint8Array(n);
  globalThis.crypto.getRandomValues(out);
  return out;
};

/** xorshift-based deterministic source, for tests only */
export function seededRandom(seed: number): RandomSource {
  let state = seed >>> 0 || 1;
  return (n) => {
    const out = new Uint8Array(n);
    for (let i = 0; i < n; i++) {
      state ^= state << 13; state >>>= 0;
      state ^= state >>> 17;
      state ^= state << 5; state >>>= 0;
      out[i] = state & 0xff;
    }
    return out;
  };
}

// ---------------------------------------------------------------------------
// Lamport one-time signatures (matches the gateway's hex serialization).
// ---------------------------------------------------------------------------

const DIGEST_BITS = 256;

export interface OtsKeyPair {
  secret: Uint8Array[]; // 512 entries: [bit0 preimage, bit1 preimage] per digest bit
  public: Uint8Array[]; // 512 digests in the same order
  used: boolean;
}

export function keygen(random: RandomSource = defaultRandom): OtsKeyPair {
  const secret: Uint8Array[] = [];
  const pub: Uint8Array[] = [];
  for (let i = 0; i < 2 * DIGEST_BITS; i++) {
    const s = random(32);
    secret.push(s);
    pub.push(sha256(s));
  }
  return { secret, public: pub, used: false };
}

function digestBit(message: Uint8Array, i: number): number {
  // bit i (MSB-first) of sha256(message)
  const d = sha256(message);
  return (d[i >> 3] >> (7 - (i & 7))) & 1;
}

export function sign(kp: OtsKeyPair, message: Uint8Array): string {
  if (kp.used) throw new Error("one-time key already used");
  kp.used = true;
  const digest = sha256(message);
  const revealed: Uint8Array[] = [];
  for (let i = 0; i < DIGEST_BITS; i++) {
    const bit = (digest[i >> 3] >> (7 - (i & 7))) & 1;
    revealed.push(kp.secret[2 * i + bit]);
  }
  return bytesToHex(concat(revealed));
}

export function verify(publicHex: string, message: Uint8Array, signatureHex: string): boolean {
  if (publicHex.length !== 2 * DIGEST_BITS * 64 || signatureHex.length !== DIGEST_BITS * 64) {
    return false;
  }
  const pub = hexToBytes(publicHex);
  const sig = hexToBytes(signatureHex);
  const digest = sha256(message);
  for (let i = 0; i < DIGEST_BITS; i++) {
    const bit = (digest[i >> 3] >> (7 - (i & 7))) & 1;
    const expected = pub.subarray(64 * i + 32 * bit, 64 * i + 32 * bit + 32);
    const got = sha256(sig.subarray(32 * i, 32 * i + 32));
    for (let j = 0; j < 32; j++) {
      if (got[j] !== expected[j]) return false;
    }
  }
  return true;
}

export function serializePublic(kp: OtsKeyPair): string {
  return bytesToHex(concat(kp.public));
}

export function publicKeyDigest(publicHex: string): string {
  return bytesToHex(sha256(hexToBytes(publicHex)));
}

// ---------------------------------------------------------------------------
// Vote message bytes (what gets signed) and the commitment digest.
// ---------------------------------------------------------------------------

function u64(v: number): Uint8Array {
  const out = new Uint8Array(8);
  new DataView(out.buffer).setBigInt64(0, BigInt(v));
  return out;
}

function lp(data: Uint8Array): Uint8Array {
  const prefix = new Uint8Array(4);
  new DataView(prefix.buffer).setUint32(0, data.length);
  return concat([prefix, data]);
}

export function pairDigest(vidHex: string, bidHex: string): string {
  return bytesToHex(sha256(concat([hexToBytes(vidHex), hexToBytes(bidHex)])));
}

export function voteMessage(pairDigestHex: string, choice: number, castAt: number): Uint8Array {
  return concat([lp(hexToBytes(pairDigestHex)), u64(choice), u64(castAt)]);
}

// ---------------------------------------------------------------------------
// One-time pad: the delivery package carries the receiving end's key bits as
// a '0'/'1' string; bytes are packed MSB-first.
// ---------------------------------------------------------------------------

export function padDecrypt(keyBits: string, keyOffset: number, ciphertextHex: string): Uint8Array {
  const data = hexToBytes(ciphertextHex);
  if (keyOffset + 8 * data.length > keyBits.length) {
    throw new Error("ciphertext extends past the pad");
  }
  const out = new Uint8Array(data.length);
  for (let i = 0; i < data.length; i++) {
    let k = 0;
    for (let b = 0; b < 8; b++) {
      k = (k << 1) | (keyBits.charCodeAt(keyOffset + 8 * i + b) - 48);
    }
    out[i] = data[i] ^ k;
  }
  return out;
}

export function padEncrypt(keyBits: string, keyOffset: number, plaintext: Uint8Array): string {
  return bytesToHex(padDecrypt(keyBits, keyOffset, bytesToHex(plaintext)));
}

export { digestBit };
