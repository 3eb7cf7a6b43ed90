import { describe, expect, it } from "vitest";

import { parseMessage, stateFrame } from "../src/protocol";
import { makeFrame } from "./helpers";

describe("parseMessage", () => {
  it("accepts a full state frame", () => {
    const msg = parseMessage(JSON.stringify(makeFrame()));
    expect(msg?.type).toBe("state");
    if (msg?.type === "state") {
      expect(msg.phi_ctrl).toBeCloseTo(172.16);
      expect(msg.grasp.phases[0]).toBe("stable");
    }
  });

  it("accepts null estimates and null ratios", () => {
    const f = makeFrame({ theta_g_hat: null });
    f.grasp.ratios = [null, null];
    const msg = parseMessage(JSON.stringify(f));
    expect(msg?.type).toBe("state");
  });

  it("accepts acks and errors", () => {
    expect(parseMessage('{"type":"ack","cmd":"set_tilt","value":9.0}'))
      .toMatchObject({ type: "ack", cmd: "set_tilt" });
    expect(parseMessage('{"type":"error","detail":"nope"}'))
      .toMatchObject({ type: "error" });
  });

  it("rejects junk without throwing", () => {
    expect(parseMessage("not json")).toBeNull();
    expect(parseMessage("[1,2]")).toBeNull();
    expect(parseMessage('{"type":"state"}')).toBeNull();
    expect(parseMessage('{"type":"telemetry","t":1}')).toBeNull();
  });

  it("rejects python-style NaN literals", () => {
    const withNan = JSON.stringify(makeFrame())
      .replace('"theta_g":0', '"theta_g":NaN');
    expect(parseMessage(withNan)).toBeNull();
  });

  it("rejects a flow thumb whose payload length lies", () => {
    const f = makeFrame();
    f.flow_thumb.u = f.flow_thumb.u.slice(0, 10);
    expect(stateFrame.safeParse(f).success).toBe(false);
  });

  it("rejects unknown contact phases", () => {
    const f = JSON.parse(JSON.stringify(makeFrame()));
    f.grasp.phases[1] = "melting";
    expect(stateFrame.safeParse(f).success).toBe(false);
  });
});
