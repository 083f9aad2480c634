import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { buildCurveSeries, parseCurvesCsv, EXPECTED_HEADER } from "../src/csv.js";
import { parseTrainLog } from "../src/logs.js";
import { renderCurves, renderLosses } from "../src/svg.js";

const CSV = new URL("./fixtures/vig_naive.csv", import.meta.url).pathname;
const LOG = new URL("./fixtures/train.log", import.meta.url).pathname;

describe("renderCurves", () => {
    it("is deterministic and well-formed", () => {
        const series = buildCurveSeries(parseCurvesCsv(readFileSync(CSV, "utf-8")));
        const a = renderCurves(series);
        const b = renderCurves(series);
        expect(a).toBe(b);
        expect(a.startsWith("<svg")).toBe(true);
        expect(a.endsWith("</svg>")).toBe(true);
        expect(a).toContain("vig_naive");
        expect(a).toContain("polyline");
    });

    it("draws one legend entry per decoder", () => {
        const text = [
            EXPECTED_HEADER,
            "mono,-,corpus,mono_freq,0,0.100000,10,0.094868",
            "mono,-,corpus,mono_naive,0,0.000000,10,0.000000",
        ].join("\n");
        const svg = renderCurves(buildCurveSeries(parseCurvesCsv(text)));
        expect(svg).toContain(">mono_freq</text>");
        expect(svg).toContain(">mono_naive</text>");
    });
});

describe("renderLosses", () => {
    it("plots train and validation panels from a real log", () => {
        const svg = renderLosses([parseTrainLog(readFileSync(LOG, "utf-8"), "desk")]);
        expect(svg).toContain("training loss");
        expect(svg).toContain("validation loss");
        expect(svg).toContain(">desk</text>");
    });

    it("omits the validation panel content when no val points exist", () => {
        const svg = renderLosses([
            parseTrainLog("step=1 loss=3.0 val_loss=- ms=1.0\n", "novall"),
        ]);
        expect(svg).toContain("no validation loss points");
    });

    it("draws one line per run", () => {
        const a = parseTrainLog("step=1 loss=3.0 val_loss=- ms=1\nstep=2 loss=2.5 val_loss=- ms=1\n", "a");
        const b = parseTrainLog("step=1 loss=3.1 val_loss=- ms=1\nstep=2 loss=2.6 val_loss=- ms=1\n", "b");
        const svg = renderLosses([a, b]);
        expect(svg).toContain(">a</text>");
        expect(svg).toContain(">b</text>");
    });
});
