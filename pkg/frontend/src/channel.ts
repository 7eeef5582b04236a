// The live render channel: debounced request emission (at most one message
// per debounce window, trailing edge) and seq-based reply reconciliation —
// only frames with a strictly higher seq than anything already shown reach
// the caller.

import type { ErrorReply, FrameReply, PatchDoc, ServerReply } from './types';
import { isFrame } from './types';

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: string }) => void) | null;
  onopen: ((ev: unknown) => void) | null;
  onclose: ((ev: unknown) => void) | null;
}

export interface ChannelOptions {
  url: string;
  debounceMs?: number;
  makeSocket?: (url: string) => SocketLike;
  onFrame: (frame: FrameReply) => void;
  onError: (reply: ErrorReply) => void;
  onStatus?: (connected: boolean) => void;
}

export const DEFAULT_DEBOUNCE_MS = 40;

export class LiveChannel {
  private socket: SocketLike;
  private seq = 0;
  private highestShownSeq = -1;
  private pending: { patches: PatchDoc; seed: number } | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private readonly debounceMs: number;
  private readonly opts: ChannelOptions;
  connected = false;

  constructor(opts: ChannelOptions) {
    this.opts = opts;
    this.debounceMs = opts.debounceMs ?? DEFAULT_DEBOUNCE_MS;
    const make = opts.makeSocket ?? ((url: string) => new WebSocket(url) as unknown as SocketLike);
    this.socket = make(opts.url);
    this.socket.onopen = () => {
      this.connected = true;
      opts.onStatus?.(true);
    };
    this.socket.onclose = () => {
      this.connected = false;
      opts.onStatus?.(false);
    };
    this.socket.onmessage = (ev) => this.receive(ev.data);
  }

  /** Queue a render request; bursts inside the debounce window coalesce. */
  request(patches: PatchDoc, seed: number): void {
    this.pending = { patches, seed };
    if (this.timer === null) {
      this.timer = setTimeout(() => this.flush(), this.debounceMs);
    }
  }

  private flush(): void {
    this.timer = null;
    if (!this.pending) return;
    const { patches, seed } = this.pending;
    this.pending = null;
    this.seq += 1;
    this.socket.send(JSON.stringify({ seq: this.seq, patches, seed, format: 'ppm' }));
  }

  private receive(data: string): void {
    let reply: ServerReply;
    try {
      reply = JSON.parse(data);
    } catch {
      return;
    }
    if (isFrame(reply)) {
      // stale frames (out-of-order replies) are dropped
      if (reply.seq > this.highestShownSeq) {
        this.highestShownSeq = reply.seq;
        this.opts.onFrame(reply);
      }
    } else {
      this.opts.onError(reply);
    }
  }

  get lastShownSeq(): number {
    return this.highestShownSeq;
  }

  close(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.socket.close();
  }
}
