/**
 * Bind manifest entries to live DOM elements and translate hovers/clicks
 * into pointer messages.
 *
 * Listeners are passive observers: they never call preventDefault or
 * stopPropagation, so the host page behaves identically with the overlay
 * attached. Rebinding is idempotent — an element already carrying the
 * uuid data attribute is not given a second listener.
 */
import { resolveLocator } from './locator'
import type { BindingEntry, PointerMessage } from './protocol'

export const UUID_ATTR = 'data-tabletalk-uuid'
export const HOVER_THROTTLE_MS = 150

export type PointerSink = (msg: PointerMessage) => void

export class Binder {
  private bound = new Map<string, Element>()
  private lastHoverAt = new Map<string, number>()
  private listeners = new Map<string, (ev: Event) => void>()

  constructor(
    private root: Document,
    private sink: PointerSink,
    private now: () => number = () => Date.now(),
  ) {}

  get boundCount(): number {
    return this.bound.size
  }

  elementFor(uuid: string): Element | undefined {
    return this.bound.get(uuid)
  }

  /** Apply a full manifest. Returns the number of entries newly bound. */
  applyManifest(entries: BindingEntry[]): number {
    let added = 0
    for (const entry of entries) {
      if (this.bindEntry(entry)) added += 1
    }
    return added
  }

  /** Apply an incremental diff from a mutation round-trip. */
  applyDiff(add: BindingEntry[], remove: string[]): void {
    for (const uuid of remove) this.unbind(uuid)
    this.applyManifest(add)
  }

  unbindAll(): void {
    for (const uuid of Array.from(this.bound.keys())) this.unbind(uuid)
  }

  private bindEntry(entry: BindingEntry): boolean {
    const existing = this.bound.get(entry.uuid)
    if (existing && existing.isConnected) return false

    const element = resolveLocator(this.root, entry.selector)
    if (!element) return false
    if (
      element.getAttribute(UUID_ATTR) === entry.uuid &&
      this.bound.has(entry.uuid)
    ) {
      return false
    }

    element.setAttribute(UUID_ATTR, entry.uuid)
    const handler = (ev: Event) => this.forward(entry, ev)
    element.addEventListener('mouseover', handler)
    element.addEventListener('click', handler)
    this.bound.set(entry.uuid, element)
    this.listeners.set(entry.uuid, handler)
    return true
  }

  private unbind(uuid: string): void {
    const element = this.bound.get(uuid)
    const handler = this.listeners.get(uuid)
    if (element && handler) {
      element.removeEventListener('mouseover', handler)
      element.removeEventListener('click', handler)
      element.removeAttribute(UUID_ATTR)
    }
    this.bound.delete(uuid)
    this.listeners.delete(uuid)
    this.lastHoverAt.delete(uuid)
  }

  private forward(entry: BindingEntry, ev: Event): void {
    // Events bubble through nested bindings (cell -> row -> table); only
    // the innermost bound element reports, so one gesture is one message.
    const self = this.bound.get(entry.uuid)
    const target = ev.target instanceof Element ? ev.target : null
    const nearest = target?.closest(`[${UUID_ATTR}]`) ?? null
    if (nearest !== self) return
    const ts = this.now()
    const kind = ev.type === 'click' ? 'click' : 'hover'
    if (kind === 'hover') {
      const last = this.lastHoverAt.get(entry.uuid)
      if (last !== undefined && ts - last < HOVER_THROTTLE_MS) return
      this.lastHoverAt.set(entry.uuid, ts)
    }
    const msg: PointerMessage = {
      type: 'pointer',
      ts,
      uuid: entry.uuid,
      role: entry.role,
      table_id: entry.table_id,
      kind,
    }
    if (entry.row_index !== null) msg.row_index = entry.row_index
    if (entry.col_index !== null) msg.col_index = entry.col_index
    if (entry.role === 'cell') {
      const element = this.bound.get(entry.uuid)
      msg.value_text = (element?.textContent ?? '').trim()
    }
    this.sink(msg)
  }
}
