/** Line transports.  The UI talks to exactly one session over a stream of
 * newline-delimited JSON; the concrete carrier (WebSocket bridge, child
 * process in tests) is behind this interface. */

export interface Transport {
  send(line: string): void;
  onLine(handler: (line: string) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

/** Splits a chunked byte/text stream into lines. */
export class LineBuffer {
  private buf = "";

  constructor(private readonly emit: (line: string) => void) {}

  feed(chunk: string): void {
    this.buf += chunk;
    for (;;) {
      const i = this.buf.indexOf("\n");
      if (i < 0) return;
      const line = this.buf.slice(0, i).trim();
      this.buf = this.buf.slice(i + 1);
      if (line) this.emit(line);
    }
  }
}

/** In-memory transport for tests: scripted server, recorded client sends. */
export class MockTransport implements Transport {
  sent: string[] = [];
  private lineHandlers: Array<(line: string) => void> = [];
  private closeHandlers: Array<() => void> = [];
  closed = false;

  send(line: string): void {
    if (this.closed) throw new Error("transport closed");
    this.sent.push(line);
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closeHandlers.push(handler);
  }

  close(): void {
    this.closed = true;
    for (const h of this.closeHandlers) h();
  }

  /** Test helper: deliver one server message. */
  serverSays(obj: unknown): void {
    const line = typeof obj === "string" ? obj : JSON.stringify(obj);
    for (const h of this.lineHandlers) h(line);
  }
}

/** Browser carrier: a WebSocket bridge that forwards text frames verbatim. */
export class WebSocketTransport implements Transport {
  private ws: WebSocket;
  private lineHandlers: Array<(line: string) => void> = [];

  constructor(url: string) {
    this.ws = new WebSocket(url);
    const buffer = new LineBuffer((line) => {
      for (const h of this.lineHandlers) h(line);
    });
    this.ws.onmessage = (ev) => buffer.feed(String(ev.data) + "\n");
  }

  send(line: string): void {
    this.ws.send(line);
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.ws.addEventListener("close", () => handler());
  }

  close(): void {
    this.ws.close();
  }
}
