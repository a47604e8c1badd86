/** Break panel: the open-break banner plus the command surface.
 * Buttons and the free-form box are enabled only while a prompt is pending,
 * so exactly one command can answer each prompt. */

import { BreakOpenPayload } from "./protocol.js";
import { UiSession } from "./session.js";

export interface BreakButton {
  label: string;
  command: string;
  enabled: boolean;
}

export interface BreakPanelView {
  visible: boolean;
  depth: number | null;
  rune: string | null;
  target: string | null;
  criteria: string | null;
  nearMissMessages: string[];
  promptPending: boolean;
  buttons: BreakButton[];
}

const COMMANDS: Array<[string, string]> = [
  [":eval", ":eval"],
  [":go", ":go"],
  [":ok", ":ok"],
  [":target", ":target"],
  [":lhs", ":lhs"],
  [":rhs", ":rhs"],
  [":hyps", ":hyps"],
  [":unify-subst", ":unify-subst"],
  [":type-alist", ":type-alist"],
  [":path", ":path"],
  [":a!", ":a!"],
];

export function breakPanelView(session: UiSession): BreakPanelView {
  const open: BreakOpenPayload | null = session.currentBreak();
  const pending = session.pendingPrompt !== null;
  return {
    visible: open !== null,
    depth: open?.depth ?? null,
    rune: open?.rune ?? null,
    target: open?.target ?? null,
    criteria: open?.criteria ?? null,
    nearMissMessages: open?.["near-miss-messages"] ?? [],
    promptPending: pending,
    buttons: COMMANDS.map(([label, command]) => ({ label, command, enabled: pending })),
  };
}

function escapeHtml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function breakPanelHtml(view: BreakPanelView): string {
  if (!view.visible) {
    return `<div class="break-panel idle">No open break.</div>`;
  }
  const near = view.nearMissMessages.length
    ? `<ul class="near-miss">` +
      view.nearMissMessages.map((m) => `<li>${escapeHtml(m)}</li>`).join("") +
      `</ul>`
    : "";
  const buttons = view.buttons
    .map(
      (b) =>
        `<button data-command="${escapeHtml(b.command)}"${b.enabled ? "" : " disabled"}>` +
        `${escapeHtml(b.label)}</button>`,
    )
    .join("");
  const box =
    `<input class="command-box" placeholder="break command"` +
    `${view.promptPending ? "" : " disabled"}>`;
  return (
    `<div class="break-panel open">` +
    `<div class="banner">(${view.depth} Breaking ${escapeHtml(view.rune ?? "")} on ` +
    `${escapeHtml(view.target ?? "")}:</div>` +
    `<div class="criteria">${escapeHtml(view.criteria ?? "")}</div>` +
    near +
    `<div class="buttons">${buttons}</div>` +
    box +
    `</div>`
  );
}

/** Wire a rendered panel into the DOM: every click or entered command sends
 * exactly one command for the pending prompt. */
export function attachBreakPanel(root: HTMLElement, session: UiSession): void {
  const render = () => {
    root.innerHTML = breakPanelHtml(breakPanelView(session));
    for (const btn of Array.from(root.querySelectorAll("button[data-command]"))) {
      btn.addEventListener("click", () => {
        session.sendCommand((btn as HTMLButtonElement).dataset.command ?? "");
      });
    }
    const box = root.querySelector<HTMLInputElement>("input.command-box");
    box?.addEventListener("keydown", (ev) => {
      if (ev.key === "Enter" && box.value.trim()) {
        session.sendCommand(box.value.trim());
        box.value = "";
      }
    });
  };
  session.addListener(render);
  render();
}
