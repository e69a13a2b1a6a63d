/**
 * Resolve the engine's structural locators: child-index paths from the
 * document root ("0/1/3/0"), counting element children only. They stay
 * stable across attribute changes, so no engine round-trip is needed to
 * find an element.
 */

export type ElementRoot = Pick<Document | Element, 'children'>

export function resolveLocator(
  root: ElementRoot,
  path: string,
): Element | null {
  if (path === '') return root instanceof Element ? root : null
  let children = root.children
  let node: Element | null = null
  for (const part of path.split('/')) {
    const idx = Number(part)
    if (!Number.isInteger(idx) || idx < 0 || idx >= children.length) {
      return null
    }
    node = children[idx]
    children = node.children
  }
  return node
}

/** Inverse of resolveLocator, used by tests and diagnostics. */
export function locatorOf(element: Element): string {
  const indices: number[] = []
  let node: Element = element
  while (node.parentElement || node.parentNode) {
    const parent = node.parentElement ?? (node.parentNode as ElementRoot)
    const siblings = Array.from((parent as ElementRoot).children)
    indices.push(siblings.indexOf(node))
    if (!(parent instanceof Element)) break
    node = parent
  }
  return indices.reverse().join('/')
}
