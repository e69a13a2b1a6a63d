/**
 * Chat panel and response presentation. The panel lives inside a
 * fixed-position shadow-DOM host so host-page styles cannot bleed in
 * (or out). Generated pages open in a side panel iframe; in-place
 * patches toggle row visibility/order on the live table.
 */
import type { PatchOp } from './protocol'

const PANEL_CSS = `
:host { all: initial; }
.panel {
  position: fixed; right: 16px; bottom: 16px; width: 320px;
  max-height: 60vh; display: flex; flex-direction: column;
  background: #fff; color: #111; border: 1px solid #888;
  border-radius: 6px; font: 13px/1.4 sans-serif; z-index: 2147483647;
  box-shadow: 0 4px 16px rgba(0,0,0,.25);
}
.transcript { flex: 1; overflow-y: auto; padding: 8px; }
.line { margin: 2px 0; }
.line.user { color: #036; }
.line.agent { color: #111; }
.line.banner { color: #a00; }
.line.clarification { color: #850; font-style: italic; }
.inputrow { display: flex; border-top: 1px solid #ccc; }
.inputrow input { flex: 1; border: 0; padding: 8px; font: inherit; }
.side {
  position: fixed; right: 352px; bottom: 16px; width: 480px; height: 60vh;
  background: #fff; border: 1px solid #888; border-radius: 6px;
  z-index: 2147483647;
}
.side iframe { width: 100%; height: 100%; border: 0; }
`

export class ChatPanel {
  readonly host: HTMLElement
  private shadow: ShadowRoot
  private transcript: HTMLElement
  private input: HTMLInputElement
  private side: HTMLElement | null = null

  constructor(
    private doc: Document,
    private onUtterance: (text: string) => void,
  ) {
    this.host = doc.createElement('div')
    this.shadow = this.host.attachShadow({ mode: 'open' })
    const style = doc.createElement('style')
    style.textContent = PANEL_CSS
    const panel = doc.createElement('div')
    panel.className = 'panel'
    this.transcript = doc.createElement('div')
    this.transcript.className = 'transcript'
    const inputRow = doc.createElement('div')
    inputRow.className = 'inputrow'
    this.input = doc.createElement('input')
    this.input.placeholder = 'Ask about a table…'
    this.input.addEventListener('keydown', (ev) => {
      if ((ev as KeyboardEvent).key === 'Enter' && this.input.value.trim()) {
        const text = this.input.value.trim()
        this.input.value = ''
        this.addLine('user', text)
        this.onUtterance(text)
      }
    })
    inputRow.appendChild(this.input)
    panel.append(this.transcript, inputRow)
    this.shadow.append(style, panel)
    doc.body.appendChild(this.host)
  }

  addLine(kind: 'user' | 'agent' | 'banner' | 'clarification', text: string) {
    const line = this.doc.createElement('div')
    line.className = `line ${kind}`
    line.textContent = kind === 'user' ? `you: ${text}` : text
    this.transcript.appendChild(line)
    this.transcript.scrollTop = this.transcript.scrollHeight
  }

  lines(): string[] {
    return Array.from(this.transcript.children).map(
      (el) => el.textContent ?? '',
    )
  }

  showBanner(text: string) {
    this.addLine('banner', text)
  }

  showClarification(prompt: string) {
    this.addLine('clarification', prompt)
  }

  /** Open (or replace) the side panel with a generated page. */
  showPage(html: string) {
    if (!this.side) {
      this.side = this.doc.createElement('div')
      this.side.className = 'side'
      const iframe = this.doc.createElement('iframe')
      this.side.appendChild(iframe)
      this.shadow.appendChild(this.side)
    }
    const iframe = this.side.querySelector('iframe') as HTMLIFrameElement
    iframe.setAttribute('srcdoc', html)
  }
}

/**
 * Apply row visibility/order instructions to a live table body. Hidden
 * rows keep their DOM position; visible rows are reordered via the CSS
 * `order` property on a flex tbody, leaving the page's own markup intact.
 */
export function applyPatch(tbody: HTMLElement, patch: PatchOp[]): void {
  const rows = Array.from(tbody.children) as HTMLElement[]
  const anyReorder = patch.some(
    (op) => op.visible && op.order !== op.row_index,
  )
  if (anyReorder) tbody.style.display = 'flex'
  if (anyReorder) tbody.style.flexDirection = 'column'
  for (const op of patch) {
    const row = rows[op.row_index]
    if (!row) continue
    row.style.display = op.visible ? '' : 'none'
    row.style.order = op.visible ? String(op.order) : ''
  }
}
