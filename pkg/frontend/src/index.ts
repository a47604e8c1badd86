/** Browser entry point: connect the dashboard to a session over a
 * WebSocket bridge (ws://host/...) that carries the line protocol. */

import { attachBreakPanel } from "./break-panel.js";
import { UiSession } from "./session.js";
import { treeHtml } from "./tree.js";
import { WebSocketTransport } from "./transport.js";

export { UiSession } from "./session.js";
export { MockTransport, WebSocketTransport, LineBuffer } from "./transport.js";
export { ProvenanceTree, treeHtml } from "./tree.js";
export { breakPanelView, breakPanelHtml, attachBreakPanel } from "./break-panel.js";
export * from "./protocol.js";

function mountTree(root: HTMLElement, session: UiSession): void {
  const render = () => {
    root.innerHTML = treeHtml(session.tree);
    for (const caret of Array.from(root.querySelectorAll("span.caret[data-id]"))) {
      caret.addEventListener("click", () => {
        session.tree?.toggle((caret as HTMLElement).dataset.id ?? "");
        render();
      });
    }
  };
  session.addListener(render);
  render();
}

function mountConsole(root: HTMLElement, session: UiSession): void {
  const render = () => {
    root.textContent = session.consoleText;
    root.scrollTop = root.scrollHeight;
  };
  session.addListener(render);
  render();
}

function mountQueryBox(root: HTMLElement, session: UiSession): void {
  const input = document.createElement("input");
  input.placeholder = "(rev x) — find the application that introduced it";
  const next = document.createElement("button");
  next.textContent = "next";
  input.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter" && input.value.trim()) session.runQuery(input.value.trim());
  });
  next.addEventListener("click", () => {
    if (input.value.trim()) session.runQuery(input.value.trim(), true);
  });
  root.append(input, next);
}

export function mount(url: string): UiSession {
  const session = new UiSession(new WebSocketTransport(url));
  const panel = document.getElementById("break-panel");
  const tree = document.getElementById("provenance");
  const consoleEl = document.getElementById("console");
  const queryEl = document.getElementById("query");
  if (panel) attachBreakPanel(panel, session);
  if (tree) mountTree(tree, session);
  if (consoleEl) mountConsole(consoleEl, session);
  if (queryEl) mountQueryBox(queryEl, session);
  return session;
}

declare global {
  interface Window {
    brrkitMount?: typeof mount;
  }
}

if (typeof window !== "undefined") {
  window.brrkitMount = mount;
}
