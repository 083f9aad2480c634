import { readFileSync } from "node:fs";
import { describe, expect, it, vi } from "vitest";

import { FormatError } from "../src/csv.js";
import { parseTrainLog } from "../src/logs.js";

const FIXTURE = new URL("./fixtures/train.log", import.meta.url).pathname;

describe("parseTrainLog", () => {
    it("parses the generated fixture", () => {
        const log = parseTrainLog(readFileSync(FIXTURE, "utf-8"), "fixture");
        expect(log.points).toHaveLength(6);
        expect(log.skipped).toBe(0);
        expect(log.points[0].step).toBe(5);
        expect(log.points[0].valLoss).toBeNull();
        expect(log.points[1].valLoss).toBeCloseTo(3.206519, 6);
    });

    it("rejects logs whose first line is not a record", () => {
        expect(() => parseTrainLog("loss,step\n1,2\n")).toThrow(FormatError);
        expect(() => parseTrainLog("")).toThrow(FormatError);
    });

    it("skips malformed lines with a warning and counts them", () => {
        const warn = vi.spyOn(console, "warn").mockImplementation(() => {});
        const text =
            "step=1 loss=3.0 val_loss=- ms=1.0\n" +
            "this line is garbage\n" +
            "step=2 loss=2.9 val_loss=2.95 ms=1.1\n";
        const log = parseTrainLog(text, "mixed");
        expect(log.points).toHaveLength(2);
        expect(log.skipped).toBe(1);
        expect(warn).toHaveBeenCalled();
        warn.mockRestore();
    });
});
