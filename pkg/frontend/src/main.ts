/** DOM wiring for the booth page. All state lives in a BoothFlow. */

import { BoothApi } from "./api.js";
import { BoothFlow } from "./flow.js";
import { drawQr } from "./qr.js";

const api = new BoothApi(
  (window as unknown as { ZKVOTE_SERVICE?: string }).ZKVOTE_SERVICE ?? "http://127.0.0.1:8722",
);
// a mid-flow refresh resumes from the tab-session snapshot (token and
// derived values only; credentials are never persisted)
const saved = sessionStorage.getItem("booth-flow");
const flow = saved ? BoothFlow.resume(saved, api) : new BoothFlow(api);

const $ = (id: string) => document.getElementById(id) as HTMLElement;
const input = (id: string) => document.getElementById(id) as HTMLInputElement;

function show(screen: string): void {
  document.querySelectorAll<HTMLElement>("[data-screen]").forEach((el) => {
    el.hidden = el.dataset.screen !== screen;
  });
}

function setText(id: string, text: string): void {
  $(id).textContent = text;
}

async function render(): Promise<void> {
  sessionStorage.setItem("booth-flow", flow.snapshot());
  show(flow.screen);
  switch (flow.screen) {
    case "credential_entry":
      setText("credential-error", flow.error ?? "");
      break;
    case "eligibility_result":
      setText(
        "eligibility-text",
        flow.eligible
          ? "Eligible: membership verified."
          : `Not admitted: ${flow.rejectionReason ?? "unknown reason"}`,
      );
      break;
    case "ballot_choice": {
      const list = $("candidate-buttons");
      list.innerHTML = "";
      flow.candidates.forEach((label, i) => {
        const button = document.createElement("button");
        button.textContent = `${i + 1}. ${label}`;
        button.onclick = () => flow.castVote(i + 1).then(render, showError);
        list.appendChild(button);
      });
      if (flow.payloadText) {
        setText("payload-text", flow.payloadText);
        drawQr($("payload-qr") as HTMLCanvasElement, flow.payloadText);
      }
      break;
    }
    case "receipt_decision":
      setText("first-part", JSON.stringify(flow.pendingFirst?.parsed, null, 2));
      break;
    case "audit_result": {
      const checks = flow.auditChecks;
      if (!checks) break;
      setText(
        "audit-details",
        [
          `revealed r = ${flow.auditedReceipt?.r}`,
          `revealed vote = ${flow.auditedReceipt?.vote} (candidate ${checks.candidate ?? "?"})`,
          `U check: ${checks.uMatches ? "ok" : "MISMATCH"}`,
          `V check: ${checks.vMatches ? "ok" : "MISMATCH"}`,
          `E check: ${checks.eMatches ? "ok" : "MISMATCH"}`,
          `W check: ${checks.wMatches ? "ok" : "MISMATCH"}`,
          `alpha check: ${checks.alphaMatches ? "ok" : "MISMATCH"}`,
        ].join("\n"),
      );
      $("audit-verdict").textContent = checks.allOk
        ? "Machine honest for this ballot. Vote again for real."
        : "MISMATCH: the machine lied about this ballot. Raise a dispute with the officer.";
      ($("audit-continue") as HTMLButtonElement).disabled = !checks.allOk;
      break;
    }
    case "confirmation":
      setText(
        "confirmation-text",
        `Vote cast. Your receipt is ballot index ${flow.confirmedIndex}. ` +
          "Check it against the public board below.",
      );
      break;
    case "receipt_check": {
      const verdict = flow.receiptVerdict;
      setText(
        "receipt-verdict",
        verdict?.verdict === "match"
          ? "Receipt matches the bulletin board byte for byte."
          : verdict?.verdict === "missing"
            ? "ALARM: the board has no receipt at this index."
            : `MISMATCH at ${verdict && "firstDifference" in verdict ? verdict.firstDifference : "?"}`,
      );
      break;
    }
  }
}

function showError(err: unknown): void {
  setText("global-error", String(err));
}

$("credential-submit").onclick = () =>
  flow
    .submitCredentials({
      voterId: input("voter-id").value,
      internalNullifier: input("internal-nullifier").value.trim(),
      commitment: input("commitment").value.trim(),
    })
    .then(render, showError);

$("register-submit").onclick = async () => {
  try {
    const cred = await api.register(input("register-id").value);
    setText(
      "register-result",
      `Registered. KEEP THIS CARD:\nvoter id: ${cred.voter_id}\n` +
        `internal nullifier: ${cred.internal_nullifier}\ncommitment: ${cred.commitment}`,
    );
  } catch (err) {
    showError(err);
  }
};

$("decision-audit").onclick = () => flow.audit().then(render, showError);
$("decision-confirm").onclick = () => flow.confirm().then(render, showError);
$("audit-continue").onclick = () => {
  flow.continueAfterAudit();
  render();
};
$("goto-receipt-check").onclick = () => {
  if (flow.confirmedIndex !== null) {
    flow.checkReceipt(flow.confirmedIndex).then(render, showError);
  }
};

render();
