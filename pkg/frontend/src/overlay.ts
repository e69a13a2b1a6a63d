/**
 * Entry point. Injected into a host page as /overlay.js (optionally with
 * ?ws=…&wake=… query parameters), it registers the page with the engine,
 * binds manifest listeners, streams pointer events and chat utterances,
 * watches for DOM mutations, and presents responses.
 */
import { Binder } from './binder'
import { ChatPanel, applyPatch } from './panel'
import { serverMessage } from './protocol'
import { SessionSocket } from './socket'

const MUTATION_DEBOUNCE_MS = 250

export interface OverlayConfig {
  wsUrl: string
  wakeWord: string
}

export function configFromScript(doc: Document): OverlayConfig {
  const script = doc.currentScript as HTMLScriptElement | null
  const params = new URLSearchParams(
    script?.src ? new URL(script.src, doc.baseURI).search : '',
  )
  const defaultWs =
    (doc.location.protocol === 'https:' ? 'wss://' : 'ws://') +
    (script?.src ? new URL(script.src, doc.baseURI).host : doc.location.host) +
    '/ws'
  return {
    wsUrl: params.get('ws') ?? defaultWs,
    wakeWord: params.get('wake') ?? 'watson',
  }
}

export class Overlay {
  readonly binder: Binder
  readonly panel: ChatPanel
  readonly socket: SessionSocket
  private observer: MutationObserver | null = null
  private mutationTimer: ReturnType<typeof setTimeout> | null = null
  private selfMutation = false

  constructor(
    private doc: Document,
    config: OverlayConfig,
    socketFactory?: ConstructorParameters<typeof SessionSocket>[0]['factory'],
  ) {
    this.binder = new Binder(doc, (msg) => this.socket.send(msg))
    this.panel = new ChatPanel(doc, (text) =>
      this.socket.send({ type: 'utterance', text }),
    )
    this.socket = new SessionSocket({
      url: config.wsUrl,
      factory: socketFactory,
      onMessage: (raw) => this.handleServerMessage(raw),
      onReconnect: () => this.register(),
      onDown: () => this.panel.showBanner('connection lost — retrying…'),
    })
  }

  start(): void {
    this.socket.connect()
    this.observeMutations()
  }

  register(): void {
    this.socket.send({
      type: 'register',
      url: this.doc.location.href,
      html: this.serialize(),
    })
  }

  private serialize(): string {
    // The panel host is part of the page now; exclude it so the engine
    // sees the page as it was.
    const clone = this.doc.documentElement.cloneNode(true) as HTMLElement
    clone
      .querySelectorAll('[data-tabletalk-panel]')
      .forEach((el) => el.remove())
    return clone.outerHTML
  }

  handleServerMessage(raw: unknown): void {
    const parsed = serverMessage.safeParse(raw)
    if (!parsed.success) return
    const msg = parsed.data
    this.selfMutation = true
    try {
      switch (msg.type) {
        case 'manifest':
          this.binder.unbindAll()
          this.binder.applyManifest(msg.entries)
          break
        case 'manifest_diff':
          this.binder.applyDiff(msg.add, msg.remove)
          break
        case 'response':
          this.panel.addLine('agent', msg.speech)
          if (msg.page_html) this.panel.showPage(msg.page_html)
          if (msg.patch) {
            const tbody = this.doc.querySelector('table tbody, table')
            if (tbody) applyPatch(tbody as HTMLElement, msg.patch)
          }
          break
        case 'clarification':
          this.panel.showClarification(msg.prompt)
          break
      }
    } finally {
      this.selfMutation = false
    }
  }

  private observeMutations(): void {
    if (typeof MutationObserver === 'undefined') return
    this.observer = new MutationObserver(() => {
      if (this.selfMutation) return
      if (this.mutationTimer) clearTimeout(this.mutationTimer)
      this.mutationTimer = setTimeout(() => {
        this.socket.send({ type: 'mutation', html: this.serialize() })
      }, MUTATION_DEBOUNCE_MS)
    })
    this.observer.observe(this.doc.documentElement, {
      subtree: true,
      childList: true,
      characterData: true,
    })
  }
}

export function boot(doc: Document = document): Overlay {
  const overlay = new Overlay(doc, configFromScript(doc))
  overlay.panel.host.setAttribute('data-tabletalk-panel', '')
  overlay.start() // the open handler registers the page
  return overlay
}

declare const __TEST__: boolean | undefined
if (typeof __TEST__ === 'undefined' && typeof document !== 'undefined') {
  boot()
}
