import { describe, expect, it } from "vitest";

import { depthToText, fifoRows, parseDepthInput } from "../src/fifos";
import type { SimReport } from "../src/types";

import reportFixture from "./fixtures/report.json";

const report = reportFixture as unknown as SimReport;

describe("fifo table rows", () => {
  it("mirrors the server's fifo rows", () => {
    const rows = fifoRows(report, new Set(), new Map());
    expect(rows).toEqual([
      {
        id: 0,
        name: "feed",
        depthText: "2",
        observed: 2,
        optimal: 2,
        dirty: false,
        error: null,
      },
    ]);
  });

  it("flags dirty rows and attaches field errors", () => {
    const rows = fifoRows(report, new Set([0]), new Map([[0, "unknown fifo 0"]]));
    expect(rows[0].dirty).toBe(true);
    expect(rows[0].error).toBe("unknown fifo 0");
  });
});

describe("depth field parsing", () => {
  it("accepts integers and the unbounded spellings", () => {
    expect(parseDepthInput("4")).toBe(4);
    expect(parseDepthInput("  12 ")).toBe(12);
    expect(parseDepthInput("unbounded")).toBeNull();
    expect(parseDepthInput("UNBOUNDED")).toBeNull();
    expect(parseDepthInput("inf")).toBeNull();
    expect(parseDepthInput("")).toBeNull();
  });

  it("rejects junk with a message fit for the field", () => {
    expect(() => parseDepthInput("three")).toThrow(/positive integer/);
    expect(() => parseDepthInput("-1")).toThrow(/positive integer/);
    expect(() => parseDepthInput("1.5")).toThrow(/positive integer/);
  });

  it("round-trips the display text", () => {
    expect(parseDepthInput(depthToText(7))).toBe(7);
    expect(parseDepthInput(depthToText(null))).toBeNull();
  });
});
