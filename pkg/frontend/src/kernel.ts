/**
 * Independent verification kernel.
 *
 * Everything the booth page needs to check without trusting the
 * election service: SHA-256 identity commitments and nullifier hashes,
 * Merkle path folding, the ballot hash alpha = H(U, V, E) (recomputed
 * over the same type-tagged, length-prefixed transcript framing the
 * service uses), and the four audited-ballot consistency equations
 * evaluated with bigint modular arithmetic. If the machine lies about
 * an opened ballot, these checks go red in the voter's own browser.
 */

export function hexToBytes(hex: string): Uint8Array {
  if (hex.length % 2 !== 0 || /[^0-9a-f]/.test(hex)) {
    throw new Error(`bad hex: ${hex.slice(0, 32)}`);
  }
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}

export function bytesToHex(bytes: Uint8Array): string {
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}

export function concat(...parts: Uint8Array[]): Uint8Array {
  const total = parts.reduce((n, p) => n + p.length, 0);
  const out = new Uint8Array(total);
  let offset = 0;
  for (const p of parts) {
    out.set(p, offset);
    offset += p.length;
  }
  return out;
}

export function utf8(text: string): Uint8Array {
  return new TextEncoder().encode(text);
}

export async function sha256(data: Uint8Array): Promise<Uint8Array> {
  const digest = await crypto.subtle.digest("SHA-256", data as BufferSource);
  return new Uint8Array(digest);
}

export function bytesToBigInt(bytes: Uint8Array): bigint {
  let v = 0n;
  for (const b of bytes) v = (v << 8n) | BigInt(b);
  return v;
}

export function bigIntToBytes(v: bigint, width: number): Uint8Array {
  const out = new Uint8Array(width);
  for (let i = width - 1; i >= 0; i--) {
    out[i] = Number(v & 0xffn);
    v >>= 8n;
  }
  if (v !== 0n) throw new Error("value does not fit the encoding width");
  return out;
}

export function modExp(base: bigint, exp: bigint, mod: bigint): bigint {
  let result = 1n;
  base %= mod;
  while (exp > 0n) {
    if (exp & 1n) result = (result * base) % mod;
    base = (base * base) % mod;
    exp >>= 1n;
  }
  return result;
}

/** Group constants as served by GET /election (hex integers). */
export interface GroupInfo {
  p: bigint;
  q: bigint;
  g1: bigint;
  g2: bigint;
  c: bigint;
  d: bigint;
  h: bigint;
  nCandidates: number;
  voterBound: number;
  elementLen: number;
  scalarLen: number;
}

export function parseGroupInfo(doc: {
  p: string;
  q: string;
  g1: string;
  g2: string;
  c: string;
  d: string;
  h: string;
  n_candidates: number;
  voter_bound: number;
}): GroupInfo {
  const p = BigInt("0x" + doc.p);
  const q = BigInt("0x" + doc.q);
  return {
    p,
    q,
    g1: BigInt("0x" + doc.g1),
    g2: BigInt("0x" + doc.g2),
    c: BigInt("0x" + doc.c),
    d: BigInt("0x" + doc.d),
    h: BigInt("0x" + doc.h),
    nCandidates: doc.n_candidates,
    voterBound: doc.voter_bound,
    elementLen: byteLength(p),
    scalarLen: byteLength(q),
  };
}

function byteLength(v: bigint): number {
  return Math.ceil(v.toString(2).length / 8);
}

// -- identity and nullifier derivations (must match the service) -------------

const ID_SEPARATOR = new Uint8Array([0x1f]);

export async function deriveIdentitySecret(
  voterId: string,
  nullifier: Uint8Array,
): Promise<Uint8Array> {
  return sha256(concat(utf8(voterId), ID_SEPARATOR, nullifier));
}

export async function deriveCommitment(
  voterId: string,
  nullifier: Uint8Array,
): Promise<Uint8Array> {
  return sha256(await deriveIdentitySecret(voterId, nullifier));
}

export async function deriveNullifierHash(
  externalNullifier: Uint8Array,
  internalNullifier: Uint8Array,
): Promise<Uint8Array> {
  return sha256(concat(externalNullifier, await sha256(internalNullifier)));
}

// -- Merkle path folding -------------------------------------------------------

export interface MerklePathInfo {
  leaf_index: number;
  siblings: string[];
  path_bits: number[];
}

export async function foldMerklePath(
  leaf: Uint8Array,
  path: MerklePathInfo,
): Promise<Uint8Array> {
  let node = leaf;
  for (let level = 0; level < path.siblings.length; level++) {
    const sibling = hexToBytes(path.siblings[level]);
    node =
      path.path_bits[level] === 0
        ? await sha256(concat(node, sibling))
        : await sha256(concat(sibling, node));
  }
  return node;
}

// -- eligibility proof payload ---------------------------------------------------

export function base64UrlEncode(bytes: Uint8Array): string {
  let binary = "";
  for (const b of bytes) binary += String.fromCharCode(b);
  return btoa(binary).replace(/\+/g, "-").replace(/\//g, "_");
}

export function buildProofPayload(fields: {
  root: string;
  leaf: string;
  path: MerklePathInfo;
  nullifierHash: string;
  externalNullifier: string;
}): string {
  const doc = {
    v: 1,
    kind: "eligibility_proof",
    mode: "merkle_disclosure",
    root: fields.root,
    leaf: fields.leaf,
    leaf_index: fields.path.leaf_index,
    siblings: fields.path.siblings,
    path_bits: fields.path.path_bits,
    nullifier_hash: fields.nullifierHash,
    external_nullifier: fields.externalNullifier,
  };
  return base64UrlEncode(utf8(JSON.stringify(doc)));
}

// -- ballot checks ---------------------------------------------------------------

/** Transcript framing: 1-byte type tag, 4-byte big-endian length, payload. */
function frame(typeTag: number, payload: Uint8Array): Uint8Array {
  const header = new Uint8Array(5);
  header[0] = typeTag;
  new DataView(header.buffer).setUint32(1, payload.length, false);
  return concat(header, payload);
}

export async function computeAlpha(
  u: bigint,
  v: bigint,
  e: bigint,
  group: GroupInfo,
): Promise<bigint> {
  const transcript = concat(
    frame(0x00, utf8("alpha")),
    frame(0x02, bigIntToBytes(u, group.elementLen)),
    frame(0x02, bigIntToBytes(v, group.elementLen)),
    frame(0x02, bigIntToBytes(e, group.elementLen)),
  );
  return bytesToBigInt(await sha256(transcript)) % group.q;
}

export function voteEncodings(group: GroupInfo): bigint[] {
  const encodings: bigint[] = [];
  for (let j = 1; j <= group.nCandidates; j++) {
    encodings.push(
      group.nCandidates === 2 ? BigInt(j - 1) : BigInt(group.voterBound) ** BigInt(j - 1),
    );
  }
  return encodings;
}

/** Map a revealed vote encoding back to its 1-based candidate index. */
export function candidateForEncoding(vote: bigint, group: GroupInfo): number | null {
  const index = voteEncodings(group).findIndex((e) => e === vote);
  return index === -1 ? null : index + 1;
}

export interface BallotFirstPart {
  index: number;
  U: string;
  V: string;
  E: string;
  W: string;
  alpha: string;
}

export interface AuditChecks {
  uMatches: boolean;
  vMatches: boolean;
  eMatches: boolean;
  wMatches: boolean;
  alphaMatches: boolean;
  candidate: number | null;
  allOk: boolean;
}

/**
 * The voter's own re-encryption check for an audited (opened) ballot:
 * g1^r = U, g2^r = V, h^r g1^vote = E, (c d^alpha)^r = W, with alpha
 * recomputed from (U, V, E) rather than taken from the receipt.
 */
export async function checkAuditedBallot(
  first: BallotFirstPart,
  revealedR: string,
  revealedVote: string,
  group: GroupInfo,
): Promise<AuditChecks> {
  const { p, q, g1, g2, c, d, h } = group;
  const u = BigInt("0x" + first.U);
  const v = BigInt("0x" + first.V);
  const e = BigInt("0x" + first.E);
  const w = BigInt("0x" + first.W);
  const r = BigInt("0x" + revealedR);
  const vote = BigInt("0x" + revealedVote);

  const alpha = await computeAlpha(u, v, e, group);
  const alphaMatches = alpha === BigInt("0x" + first.alpha);
  const uMatches = modExp(g1, r, p) === u;
  const vMatches = modExp(g2, r, p) === v;
  const eMatches = (modExp(h, r, p) * modExp(g1, vote % q, p)) % p === e;
  const wBase = (c * modExp(d, alpha, p)) % p;
  const wMatches = modExp(wBase, r, p) === w;
  const candidate = candidateForEncoding(vote, group);
  return {
    uMatches,
    vMatches,
    eMatches,
    wMatches,
    alphaMatches,
    candidate,
    allOk: uMatches && vMatches && eMatches && wMatches && alphaMatches && candidate !== null,
  };
}

// -- receipt comparison ------------------------------------------------------------

export type ReceiptVerdict =
  | { verdict: "match" }
  | { verdict: "mismatch"; firstDifference: string }
  | { verdict: "missing" };

/** Byte-compare the voter's kept receipt parts against the board's copy. */
export function compareReceipt(
  boardReceipt: string | null,
  keptFirst: string,
  keptSecond: string,
): ReceiptVerdict {
  if (boardReceipt === null) return { verdict: "missing" };
  let merged: { first?: string; second?: string };
  try {
    merged = JSON.parse(boardReceipt);
  } catch {
    return { verdict: "mismatch", firstDifference: "board receipt does not parse" };
  }
  if (merged.first === keptFirst && merged.second === keptSecond) {
    return { verdict: "match" };
  }
  const part = merged.first !== keptFirst ? "first" : "second";
  const stored = part === "first" ? merged.first : merged.second;
  const kept = part === "first" ? keptFirst : keptSecond;
  return {
    verdict: "mismatch",
    firstDifference: firstDifferingField(stored ?? "", kept, part),
  };
}

function firstDifferingField(stored: string, kept: string, part: string): string {
  try {
    const a = JSON.parse(stored);
    const b = JSON.parse(kept);
    for (const key of new Set([...Object.keys(b), ...Object.keys(a)])) {
      if (JSON.stringify(a[key]) !== JSON.stringify(b[key])) {
        return `${part} part, field "${key}"`;
      }
    }
  } catch {
    // fall through to a byte-offset report
  }
  let offset = 0;
  while (offset < Math.min(stored.length, kept.length) && stored[offset] === kept[offset]) {
    offset++;
  }
  return `${part} part, byte offset ${offset}`;
}
