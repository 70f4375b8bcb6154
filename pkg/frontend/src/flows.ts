// Voter flows: each one drives the API, updates the local session, and
// returns a plain result object the views can render. Vote signing happens
// here, client-side; the gateway never sees the OTS secret key.

import { ApiClient, ApiError, DeliveryPackage, VerifyDoc } from "./api";
import {
  RandomSource,
  bytesToHex,
  defaultRandom,
  keygen,
  pairDigest,
  padDecrypt,
  publicKeyDigest,
  serializePublic,
  sign,
  verify,
  voteMessage,
} from "./crypto";
import { VoterSession } from "./session";

export interface FlowError {
  ok: false;
  reason: string;
}

export type FlowResult<T> = ({ ok: true } & T) | FlowError;

/** Decrypt a delivery package and check the authority's signature on it. */
export function openPackage(pkg: DeliveryPackage): string {
  const payload = padDecrypt(pkg.key_bits, pkg.key_offset, pkg.ciphertext);
  if (!verify(pkg.va_public, payload, pkg.va_signature)) {
    throw new Error("authority signature on delivery failed to verify");
  }
  return bytesToHex(payload);
}

function asFlowError(err: unknown): FlowError {
  if (err instanceof ApiError) return { ok: false, reason: err.reason };
  throw err;
}

export async function registerFlow(
  client: ApiClient,
  session: VoterSession,
  credential: string,
  random: RandomSource = defaultRandom,
): Promise<FlowResult<{ maskedVid: string }>> {
  const kp = keygen(random);
  try {
    const resp = await client.register(credential, publicKeyDigest(serializePublic(kp)));
    const vid = openPackage(resp.package);
    session.setRegistration(credential, vid, kp);
    return { ok: true, maskedVid: session.maskedVid() };
  } catch (err) {
    return asFlowError(err);
  }
}

export async function ballotFlow(
  client: ApiClient,
  session: VoterSession,
): Promise<FlowResult<{ maskedBid: string }>> {
  if (!session.vid) return { ok: false, reason: "NotRegistered" };
  try {
    const resp = await client.ballot(session.vid);
    session.setBallot(openPackage(resp.package));
    return { ok: true, maskedBid: session.maskedBid() };
  } catch (err) {
    return asFlowError(err);
  }
}

export async function reballotFlow(
  client: ApiClient,
  session: VoterSession,
  random: RandomSource = defaultRandom,
): Promise<FlowResult<{ maskedBid: string }>> {
  if (!session.vid) return { ok: false, reason: "NotRegistered" };
  const kp = keygen(random);
  try {
    const resp = await client.reballot(
      session.vid,
      publicKeyDigest(serializePublic(kp)),
    );
    session.setBallot(openPackage(resp.package), kp);
    return { ok: true, maskedBid: session.maskedBid() };
  } catch (err) {
    return asFlowError(err);
  }
}

export async function castFlow(
  client: ApiClient,
  session: VoterSession,
  choice: number,
  castAt: number,
): Promise<FlowResult<{ status: string; blockHeight: number | null }>> {
  if (!session.vid || !session.bid) return { ok: false, reason: "NoActiveBallot" };
  const kp = session.takeKeyPair();
  if (kp.used) return { ok: false, reason: "KeyAlreadyUsed" };
  const digest = pairDigest(session.vid, session.bid);
  const message = voteMessage(digest, choice, castAt);
  const signature = sign(kp, message);
  session.markKeyUsed();
  try {
    const resp = await client.vote({
      pair_digest: digest,
      choice,
      cast_at: castAt,
      signature,
      signer_public: bytesToHex(concatPublic(kp.public)),
    });
    return { ok: true, status: resp.status, blockHeight: resp.block_height };
  } catch (err) {
    return asFlowError(err);
  }
}

function concatPublic(parts: Uint8Array[]): Uint8Array {
  const out = new Uint8Array(parts.length * 32);
  parts.forEach((p, i) => out.set(p, 32 * i));
  return out;
}

export async function verifyFlow(
  client: ApiClient,
  vid: string,
  bid: string,
): Promise<FlowResult<{ result: VerifyDoc }>> {
  try {
    return { ok: true, result: await client.verify(vid, bid) };
  } catch (err) {
    return asFlowError(err);
  }
}
