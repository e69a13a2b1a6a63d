/**
 * Reconnecting WebSocket client. Outbound messages are queued FIFO while
 * the socket is down and flushed in order once it reopens; the page is
 * re-registered on every (re)connect so the engine always has a current
 * snapshot.
 */
import type { ClientMessage } from './protocol'

export interface SocketLike {
  readonly readyState: number
  send(data: string): void
  close(): void
  onopen: ((ev?: unknown) => void) | null
  onmessage: ((ev: { data: string }) => void) | null
  onclose: ((ev?: unknown) => void) | null
  onerror: ((ev?: unknown) => void) | null
}

export type SocketFactory = (url: string) => SocketLike

const OPEN = 1

export interface SessionSocketOptions {
  url: string
  factory?: SocketFactory
  onMessage: (raw: unknown) => void
  onReconnect?: () => void
  onDown?: () => void
  /** Backoff schedule in ms; the last value repeats. */
  backoff?: number[]
  schedule?: (fn: () => void, ms: number) => void
}

export class SessionSocket {
  private socket: SocketLike | null = null
  private queue: ClientMessage[] = []
  private attempts = 0
  private closed = false
  private readonly backoff: number[]
  private readonly schedule: (fn: () => void, ms: number) => void
  private readonly factory: SocketFactory

  constructor(private opts: SessionSocketOptions) {
    this.backoff = opts.backoff ?? [500, 1000, 2000, 5000]
    this.schedule = opts.schedule ?? ((fn, ms) => setTimeout(fn, ms))
    this.factory =
      opts.factory ?? ((url) => new WebSocket(url) as unknown as SocketLike)
  }

  get pending(): number {
    return this.queue.length
  }

  connect(): void {
    if (this.closed) return
    const socket = this.factory(this.opts.url)
    this.socket = socket
    socket.onopen = () => {
      this.attempts = 0
      this.opts.onReconnect?.()
      this.flush()
    }
    socket.onmessage = (ev) => {
      let parsed: unknown
      try {
        parsed = JSON.parse(ev.data)
      } catch {
        return
      }
      this.opts.onMessage(parsed)
    }
    socket.onclose = () => this.retry()
    socket.onerror = () => {
      /* onclose follows; nothing to do */
    }
  }

  send(msg: ClientMessage): void {
    this.queue.push(msg)
    this.flush()
  }

  close(): void {
    this.closed = true
    this.socket?.close()
  }

  private flush(): void {
    const socket = this.socket
    if (!socket || socket.readyState !== OPEN) return
    while (this.queue.length > 0) {
      socket.send(JSON.stringify(this.queue.shift()))
    }
  }

  private retry(): void {
    if (this.closed) return
    this.opts.onDown?.()
    const delay =
      this.backoff[Math.min(this.attempts, this.backoff.length - 1)]
    this.attempts += 1
    this.schedule(() => this.connect(), delay)
  }
}
