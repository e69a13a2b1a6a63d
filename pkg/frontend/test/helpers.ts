import type { BindingEntry, ClientMessage } from '../src/protocol'
import type { SocketLike } from '../src/socket'

/** Deterministic in-memory stand-in for a WebSocket. */
export class FakeSocket implements SocketLike {
  static instances: FakeSocket[] = []
  readyState = 0 // CONNECTING
  sent: string[] = []
  onopen: ((ev?: unknown) => void) | null = null
  onmessage: ((ev: { data: string }) => void) | null = null
  onclose: ((ev?: unknown) => void) | null = null
  onerror: ((ev?: unknown) => void) | null = null

  constructor(public url: string) {
    FakeSocket.instances.push(this)
  }

  open() {
    this.readyState = 1
    this.onopen?.()
  }

  serverSends(msg: unknown) {
    this.onmessage?.({ data: JSON.stringify(msg) })
  }

  drop() {
    this.readyState = 3
    this.onclose?.()
  }

  send(data: string) {
    if (this.readyState !== 1) throw new Error('socket not open')
    this.sent.push(data)
  }

  close() {
    this.readyState = 3
  }

  sentMessages(): ClientMessage[] {
    return this.sent.map((s) => JSON.parse(s))
  }
}

export function rosterDom(rows = 3): Document {
  const body: string[] = ['<table><thead><tr>']
  for (const h of ['NAME', 'POS', 'APP']) body.push(`<th>${h}</th>`)
  body.push('</tr></thead><tbody>')
  for (let r = 0; r < rows; r++) {
    body.push(`<tr><td>player ${r}</td><td>MF</td><td>${30 + r}</td></tr>`)
  }
  body.push('</tbody></table>')
  document.body.innerHTML = body.join('')
  return document
}

/**
 * Manifest for the table produced by rosterDom, using the same
 * child-index locator scheme as the engine. With an empty body otherwise,
 * the table is body child 0: html=0? No — paths are from the document
 * root, so html is "0", body "0/1", table "0/1/0".
 */
export function rosterManifest(rows = 3): BindingEntry[] {
  const table = '0/1/0'
  const entries: BindingEntry[] = [
    {
      uuid: 'u-table',
      selector: table,
      role: 'table',
      table_id: 't0',
      row_index: null,
      col_index: null,
    },
  ]
  for (let c = 0; c < 3; c++) {
    entries.push({
      uuid: `u-h${c}`,
      selector: `${table}/0/0/${c}`,
      role: 'header',
      table_id: 't0',
      row_index: null,
      col_index: c,
    })
  }
  for (let r = 0; r < rows; r++) {
    entries.push({
      uuid: `u-r${r}`,
      selector: `${table}/1/${r}`,
      role: 'row',
      table_id: 't0',
      row_index: r,
      col_index: null,
    })
    for (let c = 0; c < 3; c++) {
      entries.push({
        uuid: `u-c${r}-${c}`,
        selector: `${table}/1/${r}/${c}`,
        role: 'cell',
        table_id: 't0',
        row_index: r,
        col_index: c,
      })
    }
  }
  return entries
}
