/** One WebSocket per session, with client-side turn queueing.
 *
 * The engine rejects a new utterance while a question is pending and the UI
 * must not interleave turns, so messages sent while a turn is in flight are
 * queued and dispatched when a terminal message (turn_completed,
 * turn_failed, question_pending, error) arrives. On socket loss the
 * connection reopens against the same session and asks the app to resync.
 */

import {
  type ClientMessage,
  type ServerMessage,
  isTerminal,
  parseServerMessage,
} from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onopen: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ConnectionCallbacks {
  onMessage: (message: ServerMessage) => void;
  onBusyChange?: (busy: boolean, queued: number) => void;
  onResync?: () => void;
}

export class ConsoleConnection {
  private socket: SocketLike | null = null;
  private socketOpen = false;
  private queue: ClientMessage[] = [];
  private busy = false;
  private closed = false;
  private everConnected = false;

  constructor(
    private readonly url: string,
    private readonly callbacks: ConnectionCallbacks,
    private readonly makeSocket: SocketFactory,
    private readonly reconnectDelayMs = 500,
  ) {}

  connect(): void {
    const socket = this.makeSocket(this.url);
    this.socket = socket;
    this.socketOpen = false;
    socket.onopen = () => {
      this.socketOpen = true;
      if (this.everConnected) this.callbacks.onResync?.();
      this.everConnected = true;
      this.pump();
    };
    socket.onmessage = (event) => {
      const message = parseServerMessage(String(event.data));
      if (message === null) return;
      if (isTerminal(message)) this.setBusy(false);
      this.callbacks.onMessage(message);
      this.pump();
    };
    socket.onclose = () => {
      if (this.closed) return;
      this.socket = null;
      this.socketOpen = false;
      this.setBusy(false);
      setTimeout(() => {
        if (!this.closed) this.connect();
      }, this.reconnectDelayMs);
    };
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
    this.socket = null;
  }

  get isBusy(): boolean {
    return this.busy;
  }

  get queuedCount(): number {
    return this.queue.length;
  }

  sendUtterance(text: string): void {
    this.enqueue({ type: "utterance", text });
  }

  sendAnswer(text: string): void {
    this.enqueue({ type: "answer", text });
  }

  sendAudioRef(ref: string): void {
    this.enqueue({ type: "upload_audio_ref", ref });
  }

  private enqueue(message: ClientMessage): void {
    this.queue.push(message);
    this.notify();
    this.pump();
  }

  private pump(): void {
    if (this.busy || !this.socket || !this.socketOpen || !this.queue.length) return;
    const message = this.queue.shift()!;
    this.setBusy(true);
    this.socket.send(JSON.stringify(message));
  }

  private setBusy(busy: boolean): void {
    if (this.busy !== busy) {
      this.busy = busy;
      this.notify();
    }
  }

  private notify(): void {
    this.callbacks.onBusyChange?.(this.busy, this.queue.length);
  }
}
