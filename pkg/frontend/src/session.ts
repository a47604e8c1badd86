/** Client-side mirror of the protocol stream.
 *
 * Session discipline: at most one pending break prompt at a time, and every
 * command must answer a prompt: either the top level (state "idle") or an
 * open break prompt (state "at-break").  While a proof is running between
 * prompts (state "proving") sending throws.
 */

import {
  BreakOpenPayload,
  DumpRecord,
  ProofOutcomePayload,
  ProtocolMessage,
  QueryResultPayload,
  commandLine,
  parseMessage,
} from "./protocol.js";
import { Transport } from "./transport.js";
import { ProvenanceTree } from "./tree.js";

export type UiState = "idle" | "proving" | "at-break";

export interface PendingPrompt {
  depth: number;
}

const PROOF_COMMANDS = /^\s*\((thm|with-brr-data)\b/i;

export class UiSession {
  state: UiState = "idle";
  connected = true;
  pendingPrompt: PendingPrompt | null = null;
  eventLog: ProtocolMessage[] = [];
  consoleText = "";
  openBreaks: BreakOpenPayload[] = [];
  lastQuery: QueryResultPayload | null = null;
  lastOutcome: ProofOutcomePayload | null = null;
  lastError: string | null = null;
  tree: ProvenanceTree | null = null;
  private listeners: Array<() => void> = [];
  private lastSeq = 0;

  constructor(private readonly transport: Transport) {
    transport.onLine((line) => this.handleLine(line));
    transport.onClose(() => {
      this.connected = false;
      this.notify();
    });
  }

  addListener(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  handleLine(line: string): void {
    this.handleMessage(parseMessage(line));
  }

  handleMessage(msg: ProtocolMessage): void {
    if (msg.seq <= this.lastSeq) {
      throw new Error(`protocol sequence went backwards: ${msg.seq}`);
    }
    this.lastSeq = msg.seq;
    this.eventLog.push(msg);
    switch (msg.kind) {
      case "event": {
        const payload = msg.payload as { text?: string; type?: string; records?: DumpRecord[] };
        if (payload.type === "brr-data-dump") {
          this.tree = ProvenanceTree.fromDump(payload.records ?? []);
        } else if (typeof payload.text === "string") {
          this.consoleText += payload.text;
        }
        break;
      }
      case "break-open":
        this.openBreaks.push(msg.payload as unknown as BreakOpenPayload);
        break;
      case "break-prompt": {
        if (this.pendingPrompt !== null) {
          throw new Error("a second break prompt arrived while one was pending");
        }
        this.pendingPrompt = { depth: msg.payload.depth as number };
        this.state = "at-break";
        break;
      }
      case "break-close":
        this.openBreaks.pop();
        break;
      case "proof-outcome":
        this.lastOutcome = msg.payload as unknown as ProofOutcomePayload;
        this.state = "idle";
        break;
      case "query-result": {
        this.lastQuery = msg.payload as unknown as QueryResultPayload;
        const path = this.lastQuery.product_path;
        if (this.tree && path) this.tree.highlight(path);
        break;
      }
      case "error":
        this.lastError = String(msg.payload.message ?? "");
        break;
      case "command":
        break;
    }
    this.notify();
  }

  /** Send one command.  Exactly one command answers each break prompt; a
   * command sent while the proof is running (no prompt) is rejected. */
  sendCommand(text: string): void {
    if (!this.connected) throw new Error("session disconnected");
    if (this.state === "proving") {
      throw new Error("no pending prompt: the proof is running");
    }
    if (this.state === "at-break") {
      this.pendingPrompt = null;
      this.state = "proving";
    } else if (PROOF_COMMANDS.test(text)) {
      this.state = "proving";
    }
    this.transport.send(commandLine(text));
    this.notify();
  }

  runQuery(term: string, iterative = false): void {
    const star = iterative ? "*" : "";
    this.sendCommand(`(cw-gstack-for-subterm${star} ${term})`);
  }

  requestDump(): void {
    this.sendCommand("(dump-brr-data)");
  }

  currentBreak(): BreakOpenPayload | null {
    return this.openBreaks.length ? this.openBreaks[this.openBreaks.length - 1] : null;
  }
}
