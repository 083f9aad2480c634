/** Parser for line-delimited training logs:
 *      step=<int> loss=<float> val_loss=<float|-> ms=<float>
 */

import { FormatError } from "./csv.js";

export interface LogPoint {
    step: number;
    loss: number;
    valLoss: number | null;
    ms: number;
}

export interface ParsedLog {
    label: string;
    points: LogPoint[];
    skipped: number;
}

const LINE_RE =
    /^step=(\d+) loss=([0-9.eE+-]+) val_loss=(-|[0-9.eE+-]+) ms=([0-9.eE+-]+)$/;

export function parseTrainLog(text: string, label = "run"): ParsedLog {
    const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
    if (lines.length === 0) {
        throw new FormatError(`${label}: empty log`);
    }
    if (!LINE_RE.test(lines[0])) {
        throw new FormatError(
            `${label}: first line is not a training log record: "${lines[0]}"`,
        );
    }
    const points: LogPoint[] = [];
    let skipped = 0;
    for (const line of lines) {
        const m = LINE_RE.exec(line);
        if (!m) {
            skipped += 1;
            console.warn(`warning: ${label}: skipping malformed line: "${line}"`);
            continue;
        }
        const valLoss = m[3] === "-" ? null : Number(m[3]);
        const point: LogPoint = {
            step: Number(m[1]),
            loss: Number(m[2]),
            valLoss,
            ms: Number(m[4]),
        };
        if (!Number.isFinite(point.loss) || (valLoss !== null && !Number.isFinite(valLoss))) {
            skipped += 1;
            console.warn(`warning: ${label}: skipping non-finite values: "${line}"`);
            continue;
        }
        points.push(point);
    }
    if (skipped > 0) {
        console.warn(`warning: ${label}: skipped ${skipped} malformed line(s)`);
    }
    return { label, points, skipped };
}
