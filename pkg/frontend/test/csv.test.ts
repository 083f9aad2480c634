import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
    buildCurveSeries,
    EXPECTED_HEADER,
    formatCurvesCsv,
    FormatError,
    parseCurvesCsv,
} from "../src/csv.js";

const FIXTURE = new URL("./fixtures/vig_naive.csv", import.meta.url).pathname;

describe("parseCurvesCsv", () => {
    it("parses the generated fixture", () => {
        const rows = parseCurvesCsv(readFileSync(FIXTURE, "utf-8"));
        expect(rows).toHaveLength(17);
        expect(rows[0]).toEqual({
            scheme: "vig",
            keyLen: "8",
            messageDist: "uniform",
            decoder: "vig_naive",
            examples: 0,
            accuracy: 0,
            n: 100,
            stderr: 0,
        });
    });

    it("round-trips all numeric fields to 6 decimals", () => {
        const text = readFileSync(FIXTURE, "utf-8");
        expect(formatCurvesCsv(parseCurvesCsv(text))).toBe(text);
    });

    it("rejects malformed headers", () => {
        expect(() => parseCurvesCsv("nope,nope\n1,2\n")).toThrow(FormatError);
        expect(() => parseCurvesCsv(EXPECTED_HEADER.replace("accuracy", "acc") + "\n")).toThrow(
            FormatError,
        );
        expect(() => parseCurvesCsv("")).toThrow(FormatError);
    });

    it("rejects short rows and non-numeric fields", () => {
        expect(() => parseCurvesCsv(EXPECTED_HEADER + "\nmono,-,corpus,naive,0,0.5\n")).toThrow(
            FormatError,
        );
        expect(() =>
            parseCurvesCsv(EXPECTED_HEADER + "\nmono,-,corpus,naive,zero,0.5,100,0.05\n"),
        ).toThrow(FormatError);
    });

    it("rejects a header with no data", () => {
        expect(() => parseCurvesCsv(EXPECTED_HEADER + "\n")).toThrow(FormatError);
    });
});

describe("buildCurveSeries", () => {
    it("reproduces the step to accuracy 1.0 at x = key length", () => {
        // the vig_naive decoder knows the key length (8 in the fixture): it
        // abstains until every key position is covered, then is exact
        const rows = parseCurvesCsv(readFileSync(FIXTURE, "utf-8"));
        const series = buildCurveSeries(rows);
        expect(series).toHaveLength(1);
        const s = series[0];
        expect(s.decoder).toBe("vig_naive");
        const keyLen = 8;
        for (let i = 0; i < s.x.length; i++) {
            if (s.x[i] >= keyLen) {
                expect(s.y[i]).toBe(1.0);
            } else {
                expect(s.y[i]).toBeLessThan(1.0);
            }
        }
        expect(s.y[s.x.indexOf(keyLen - 1)]).toBeLessThan(1.0);
        expect(s.y[s.x.indexOf(keyLen)]).toBe(1.0);
    });

    it("groups by decoder and sorts x ascending", () => {
        const text = [
            EXPECTED_HEADER,
            "mono,-,corpus,mono_freq,1,0.500000,10,0.158114",
            "mono,-,corpus,mono_freq,0,0.100000,10,0.094868",
            "mono,-,corpus,mono_naive,0,0.000000,10,0.000000",
            "mono,-,corpus,mono_naive,1,0.400000,10,0.154919",
        ].join("\n");
        const series = buildCurveSeries(parseCurvesCsv(text));
        expect(series.map((s) => s.label)).toEqual(["mono_freq", "mono_naive"]);
        expect(series[0].x).toEqual([0, 1]);
        expect(series[0].y).toEqual([0.1, 0.5]);
    });
});
