/**
 * Booth view-state machine.
 *
 * Screens mirror the service's session state machine one-for-one:
 * credential_entry -> eligibility_result -> ballot_choice ->
 * receipt_decision -> (audit_result -> ballot_choice)* ->
 * confirmation -> receipt_check. The page keeps credential material
 * only in this in-memory object (nothing is persisted beyond the tab),
 * and the only values that ever reach the network are derived hashes
 * and the eligibility payload.
 */

import { ApiError, BoothApi } from "./api.js";
import {
  AuditChecks,
  BallotFirstPart,
  GroupInfo,
  ReceiptVerdict,
  buildProofPayload,
  bytesToHex,
  checkAuditedBallot,
  compareReceipt,
  deriveCommitment,
  deriveNullifierHash,
  foldMerklePath,
  hexToBytes,
  parseGroupInfo,
} from "./kernel.js";

export type Screen =
  | "credential_entry"
  | "eligibility_result"
  | "ballot_choice"
  | "receipt_decision"
  | "audit_result"
  | "confirmation"
  | "receipt_check";

export interface CredentialCard {
  voterId: string;
  internalNullifier: string; // hex, from the registration handoff
  commitment: string; // hex, printed on the card at registration
}

export interface KeptReceipt {
  index: number;
  first: string;
  second: string;
  kind: "audited" | "confirmed";
}

export class BoothFlow {
  screen: Screen = "credential_entry";
  error: string | null = null;
  rejectionReason: string | null = null;
  eligible: boolean | null = null;
  payloadText: string | null = null;
  token: string | null = null;
  group: GroupInfo | null = null;
  candidates: string[] = [];
  pendingFirst: { text: string; parsed: BallotFirstPart } | null = null;
  auditChecks: AuditChecks | null = null;
  auditedReceipt: { r: string; vote: string } | null = null;
  confirmedIndex: number | null = null;
  keptReceipts: KeptReceipt[] = [];
  receiptVerdict: ReceiptVerdict | null = null;

  constructor(public api: BoothApi) {}

  /**
   * Credential entry. The commitment on the registration card is
   * recomputed locally first; a typo is caught before anything goes
   * over the network.
   */
  async submitCredentials(card: CredentialCard): Promise<Screen> {
    this.error = null;
    const nullifier = hexToBytes(card.internalNullifier);
    const commitment = bytesToHex(await deriveCommitment(card.voterId, nullifier));
    if (commitment !== card.commitment.toLowerCase()) {
      this.error = "credential mismatch: the recomputed commitment differs from the card";
      return this.screen; // no network traffic happened
    }

    const info = await this.api.election();
    this.group = parseGroupInfo(info);
    this.candidates = info.candidates;
    const external = info.external_nullifier;

    let path;
    try {
      path = await this.api.registryPath(commitment);
    } catch (err) {
      if (err instanceof ApiError && err.rejection.status === 404) {
        this.eligible = false;
        this.rejectionReason = "not_in_registry";
        this.screen = "eligibility_result";
        return this.screen;
      }
      throw err;
    }

    // check the service's own path before trusting it
    const folded = bytesToHex(await foldMerklePath(hexToBytes(commitment), path));
    if (folded !== path.root) {
      this.eligible = false;
      this.rejectionReason = "bad_path_material";
      this.screen = "eligibility_result";
      return this.screen;
    }

    const nullifierHash = bytesToHex(
      await deriveNullifierHash(hexToBytes(external), nullifier),
    );
    this.payloadText = buildProofPayload({
      root: path.root,
      leaf: commitment,
      path,
      nullifierHash,
      externalNullifier: external,
    });

    try {
      const session = await this.api.createSession(this.payloadText);
      this.token = session.token;
      this.eligible = true;
      this.screen = "ballot_choice";
    } catch (err) {
      if (err instanceof ApiError) {
        this.eligible = false;
        this.rejectionReason = err.rejection.reason;
        this.screen = "eligibility_result";
      } else {
        throw err;
      }
    }
    return this.screen;
  }

  async castVote(candidate: number): Promise<Screen> {
    if (this.screen !== "ballot_choice" || !this.token) {
      throw new Error("not ready to cast a vote");
    }
    const result = await this.api.castVote(this.token, candidate);
    this.pendingFirst = { text: result.first, parsed: JSON.parse(result.first) };
    this.screen = "receipt_decision";
    return this.screen;
  }

  /** Benaloh challenge: open the ballot and re-check it locally. */
  async audit(): Promise<Screen> {
    if (this.screen !== "receipt_decision" || !this.token || !this.pendingFirst || !this.group) {
      throw new Error("no ballot is awaiting a decision");
    }
    const result = await this.api.decide(this.token, "audit");
    const second = JSON.parse(result.second) as { r: string; vote: string };
    this.keptReceipts.push({
      index: result.receipt_index,
      first: this.pendingFirst.text,
      second: result.second,
      kind: "audited",
    });
    this.auditedReceipt = { r: second.r, vote: second.vote };
    this.auditChecks = await checkAuditedBallot(
      this.pendingFirst.parsed,
      second.r,
      second.vote,
      this.group,
    );
    this.pendingFirst = null;
    this.screen = "audit_result";
    return this.screen;
  }

  /** After a green audit the booth reopens for the real vote. */
  continueAfterAudit(): Screen {
    if (this.screen !== "audit_result") throw new Error("no audit to continue from");
    if (!this.auditChecks?.allOk) {
      throw new Error("audit mismatch: raise a dispute instead of continuing");
    }
    this.auditChecks = null;
    this.auditedReceipt = null;
    this.screen = "ballot_choice";
    return this.screen;
  }

  async confirm(): Promise<Screen> {
    if (this.screen !== "receipt_decision" || !this.token || !this.pendingFirst) {
      throw new Error("no ballot is awaiting a decision");
    }
    const result = await this.api.decide(this.token, "confirm");
    this.keptReceipts.push({
      index: result.receipt_index,
      first: this.pendingFirst.text,
      second: result.second,
      kind: "confirmed",
    });
    this.confirmedIndex = result.receipt_index;
    this.pendingFirst = null;
    this.token = null; // session closed server-side
    this.screen = "confirmation";
    return this.screen;
  }

  /** Byte-compare a kept receipt against the bulletin board's copy. */
  async checkReceipt(index: number): Promise<Screen> {
    const kept = this.keptReceipts.find((r) => r.index === index);
    if (!kept) throw new Error(`no kept receipt with index ${index}`);
    const board = await this.api.boardReceipt(index);
    this.receiptVerdict = compareReceipt(board, kept.first, kept.second);
    this.screen = "receipt_check";
    return this.screen;
  }

  /**
   * Tab-session snapshot so a mid-flow page refresh recovers via the
   * session token. Carries derived values and receipts only; credential
   * material is never part of it.
   */
  snapshot(): string {
    return JSON.stringify({
      screen: this.screen,
      token: this.token,
      eligible: this.eligible,
      payloadText: this.payloadText,
      candidates: this.candidates,
      pendingFirst: this.pendingFirst?.text ?? null,
      confirmedIndex: this.confirmedIndex,
      keptReceipts: this.keptReceipts,
      group: this.group && {
        p: this.group.p.toString(16),
        q: this.group.q.toString(16),
        g1: this.group.g1.toString(16),
        g2: this.group.g2.toString(16),
        c: this.group.c.toString(16),
        d: this.group.d.toString(16),
        h: this.group.h.toString(16),
        n_candidates: this.group.nCandidates,
        voter_bound: this.group.voterBound,
      },
    });
  }

  static resume(text: string, api: BoothApi): BoothFlow {
    const doc = JSON.parse(text);
    const flow = new BoothFlow(api);
    flow.screen = doc.screen;
    flow.token = doc.token;
    flow.eligible = doc.eligible;
    flow.payloadText = doc.payloadText;
    flow.candidates = doc.candidates ?? [];
    flow.confirmedIndex = doc.confirmedIndex;
    flow.keptReceipts = doc.keptReceipts ?? [];
    if (doc.pendingFirst) {
      flow.pendingFirst = { text: doc.pendingFirst, parsed: JSON.parse(doc.pendingFirst) };
    }
    if (doc.group) flow.group = parseGroupInfo(doc.group);
    return flow;
  }
}
