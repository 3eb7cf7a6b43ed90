/** Wire types for the live-service WebSocket.
 *
 * The server pushes `state` frames at the broadcast rate and answers
 * every inbound command with one `ack` or `error` object on the same
 * socket. Estimates the active sensing mode does not produce arrive as
 * null, as do force ratios when a finger has no normal force.
 */

import { z } from "zod";

export const MODES = ["tactile", "imu_foot", "imu_leg"] as const;
export type Mode = (typeof MODES)[number];

export const PHASES = [
  "stable", "incipient", "slipping", "recovery", "broken",
] as const;
export type Phase = (typeof PHASES)[number];

const phase = z.enum(PHASES);

const flowThumb = z
  .object({
    w: z.number().int().positive(),
    h: z.number().int().positive(),
    u: z.array(z.number()),
    v: z.array(z.number()),
  })
  .refine((f) => f.u.length === f.w * f.h && f.v.length === f.w * f.h, {
    message: "flow thumb length does not match w*h",
  });

export const stateFrame = z.object({
  type: z.literal("state"),
  t: z.number(),
  theta_g: z.number(),
  theta_f_true: z.number(),
  theta_f_hat: z.number().nullable(),
  theta_g_hat: z.number().nullable(),
  phi_ctrl: z.number(),
  phi_ref: z.number(),
  duty: z.number(),
  contact: z.boolean(),
  mode: z.enum(MODES),
  grasp: z.object({
    ratios: z.tuple([z.number().nullable(), z.number().nullable()]),
    phases: z.tuple([phase, phase]),
    D_g: z.number(),
    intact: z.boolean(),
  }),
  flow_thumb: flowThumb,
});
export type StateFrame = z.infer<typeof stateFrame>;

export const ack = z.object({
  type: z.literal("ack"),
  cmd: z.string(),
  value: z.unknown().optional(),
});
export type Ack = z.infer<typeof ack>;

export const serverError = z.object({
  type: z.literal("error"),
  cmd: z.string().optional(),
  detail: z.string(),
});
export type ServerError = z.infer<typeof serverError>;

export const serverMessage = z.discriminatedUnion("type", [
  stateFrame, ack, serverError,
]);
export type ServerMessage = z.infer<typeof serverMessage>;

export type Command =
  | { set_tilt: number }
  | { load_weight: number }
  | { set_mode: Mode }
  | { controller: "on" | "off" }
  | { reset: null };

/** Parse one socket payload; null for anything that doesn't validate. */
export function parseMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  const res = serverMessage.safeParse(raw);
  return res.success ? res.data : null;
}

/** /health payload fields the dashboard uses (extra keys ignored). */
export const healthInfo = z.object({
  status: z.string(),
  mode: z.enum(MODES),
  mu_nominal: z.number().positive(),
  band_d: z.number().positive(),
  broadcast_hz: z.number().positive(),
});
export type HealthInfo = z.infer<typeof healthInfo>;
