/** Wire types for the newline-delimited JSON session protocol. */

export type MessageKind =
  | "event"
  | "break-open"
  | "break-prompt"
  | "break-close"
  | "query-result"
  | "proof-outcome"
  | "command"
  | "error";

export interface ProtocolMessage {
  seq: number;
  kind: MessageKind;
  payload: Record<string, unknown>;
}

export interface BreakOpenPayload {
  depth: number;
  rune: string;
  target: string;
  criteria?: string;
  "near-miss-messages"?: string[];
}

export interface QueryResultPayload {
  found: boolean;
  rune?: string;
  instance?: string;
  result?: string;
  frames?: string[];
  product_path?: number[];
  product_result?: string;
}

export interface ProofOutcomePayload {
  proved: boolean;
  aborted: boolean;
  checkpoints: string[];
}

export interface DumpRecord {
  rune: string;
  target: string;
  result: string | null;
  failure_reason: string | null;
  children: DumpRecord[];
}

export function parseMessage(line: string): ProtocolMessage {
  const msg = JSON.parse(line) as ProtocolMessage;
  if (typeof msg.seq !== "number" || typeof msg.kind !== "string") {
    throw new Error(`malformed protocol message: ${line}`);
  }
  return msg;
}

export function commandLine(text: string): string {
  return JSON.stringify({ kind: "command", payload: { text } });
}
