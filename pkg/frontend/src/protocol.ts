/**
 * Wire protocol shared with the session service. The overlay has no
 * build-time coupling to the engine beyond these message shapes.
 */
import { z } from 'zod'

export const pointerRole = z.enum(['cell', 'header', 'row', 'table'])

export const pointerMessage = z
  .object({
    type: z.literal('pointer'),
    ts: z.number().int(),
    uuid: z.string().min(1),
    role: pointerRole,
    table_id: z.string().min(1),
    row_index: z.number().int().nonnegative().optional(),
    col_index: z.number().int().nonnegative().optional(),
    value_text: z.string().optional(),
    kind: z.enum(['hover', 'click']).default('hover'),
  })
  .superRefine((msg, ctx) => {
    if (msg.role === 'cell') {
      for (const field of ['row_index', 'col_index', 'value_text'] as const) {
        if (msg[field] === undefined) {
          ctx.addIssue({
            code: z.ZodIssueCode.custom,
            message: `cell pointer requires ${field}`,
          })
        }
      }
    }
    if (msg.role === 'header' && msg.col_index === undefined) {
      ctx.addIssue({
        code: z.ZodIssueCode.custom,
        message: 'header pointer requires col_index',
      })
    }
  })

export const registerMessage = z.object({
  type: z.literal('register'),
  url: z.string(),
  html: z.string(),
})

export const mutationMessage = z.object({
  type: z.literal('mutation'),
  html: z.string(),
})

export const utteranceMessage = z.object({
  type: z.literal('utterance'),
  text: z.string(),
})

export const clientMessage = z.union([
  registerMessage,
  mutationMessage,
  pointerMessage,
  utteranceMessage,
])

export const bindingEntry = z.object({
  uuid: z.string().min(1),
  selector: z.string(),
  role: pointerRole,
  table_id: z.string(),
  row_index: z.number().int().nullable(),
  col_index: z.number().int().nullable(),
})

export const manifestMessage = z.object({
  type: z.literal('manifest'),
  entries: z.array(bindingEntry),
  seq: z.number().int(),
})

export const manifestDiffMessage = z.object({
  type: z.literal('manifest_diff'),
  add: z.array(bindingEntry),
  remove: z.array(z.string()),
  seq: z.number().int(),
})

export const patchOp = z.object({
  row_index: z.number().int().nonnegative(),
  visible: z.boolean(),
  order: z.number().int(),
})

export const responseMessage = z.object({
  type: z.literal('response'),
  speech: z.string(),
  page_html: z.string().optional(),
  patch: z.array(patchOp).optional(),
  seq: z.number().int(),
})

export const clarificationMessage = z.object({
  type: z.literal('clarification'),
  prompt_id: z.string(),
  prompt: z.string(),
  seq: z.number().int(),
})

export const serverMessage = z.discriminatedUnion('type', [
  manifestMessage,
  manifestDiffMessage,
  responseMessage,
  clarificationMessage,
])

export type PointerMessage = z.infer<typeof pointerMessage>
export type ClientMessage = z.infer<typeof clientMessage>
export type BindingEntry = z.infer<typeof bindingEntry>
export type PatchOp = z.infer<typeof patchOp>
export type ServerMessage = z.infer<typeof serverMessage>
