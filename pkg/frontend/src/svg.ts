/** Dependency-free SVG chart rendering. Output is deterministic for a given
 *  input, so figures can be diffed and regenerated in CI. */

import { CurveSeries } from "./csv.js";
import { ParsedLog } from "./logs.js";

export const PALETTE = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

interface Scale {
    (v: number): number;
    domain: [number, number];
}

function scaleLinear(domain: [number, number], range: [number, number]): Scale {
    const [d0, d1] = domain;
    const [r0, r1] = range;
    const span = d1 - d0 || 1;
    const fn = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
    fn.domain = domain;
    return fn;
}

function niceTicks(lo: number, hi: number, count = 5): number[] {
    const span = hi - lo || 1;
    const step = Math.pow(10, Math.floor(Math.log10(span / count)));
    const err = span / count / step;
    const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
    const s = step * mult;
    const ticks: number[] = [];
    for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-9; v += s) {
        ticks.push(Number(v.toFixed(10)));
    }
    return ticks;
}

function fmt(v: number): string {
    return Number(v.toFixed(6)).toString();
}

function esc(text: string): string {
    return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

interface Frame {
    x0: number;
    y0: number;
    w: number;
    h: number;
    sx: Scale;
    sy: Scale;
}

function axes(frame: Frame, xLabel: string, yLabel: string, title: string): string[] {
    const { x0, y0, w, h, sx, sy } = frame;
    const parts: string[] = [];
    parts.push(
        `<rect x="${x0}" y="${y0}" width="${w}" height="${h}" fill="none" stroke="#333" stroke-width="1"/>`,
    );
    for (const t of niceTicks(sx.domain[0], sx.domain[1])) {
        const px = sx(t);
        parts.push(`<line x1="${fmt(px)}" y1="${y0 + h}" x2="${fmt(px)}" y2="${y0 + h + 4}" stroke="#333"/>`);
        parts.push(
            `<text x="${fmt(px)}" y="${y0 + h + 16}" font-size="10" text-anchor="middle" fill="#333">${fmt(t)}</text>`,
        );
    }
    for (const t of niceTicks(sy.domain[0], sy.domain[1])) {
        const py = sy(t);
        parts.push(`<line x1="${x0 - 4}" y1="${fmt(py)}" x2="${x0}" y2="${fmt(py)}" stroke="#333"/>`);
        parts.push(
            `<text x="${x0 - 7}" y="${fmt(py + 3)}" font-size="10" text-anchor="end" fill="#333">${fmt(t)}</text>`,
        );
        parts.push(
            `<line x1="${x0}" y1="${fmt(py)}" x2="${x0 + w}" y2="${fmt(py)}" stroke="#ddd" stroke-width="0.5"/>`,
        );
    }
    parts.push(
        `<text x="${x0 + w / 2}" y="${y0 + h + 32}" font-size="12" text-anchor="middle" fill="#111">${esc(xLabel)}</text>`,
    );
    parts.push(
        `<text x="${x0 - 38}" y="${y0 + h / 2}" font-size="12" text-anchor="middle" fill="#111" transform="rotate(-90 ${x0 - 38} ${y0 + h / 2})">${esc(yLabel)}</text>`,
    );
    parts.push(
        `<text x="${x0 + w / 2}" y="${y0 - 8}" font-size="13" text-anchor="middle" fill="#111">${esc(title)}</text>`,
    );
    return parts;
}

function polyline(xs: number[], ys: number[], sx: Scale, sy: Scale, color: string): string {
    const pts = xs.map((x, i) => `${fmt(sx(x))},${fmt(sy(ys[i]))}`).join(" ");
    return `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.6"/>`;
}

function band(
    xs: number[],
    lo: number[],
    hi: number[],
    sx: Scale,
    sy: Scale,
    color: string,
): string {
    const fwd = xs.map((x, i) => `${fmt(sx(x))},${fmt(sy(hi[i]))}`);
    const back = [...xs].reverse().map((x, i) => {
        const j = xs.length - 1 - i;
        return `${fmt(sx(x))},${fmt(sy(lo[j]))}`;
    });
    return `<polygon points="${[...fwd, ...back].join(" ")}" fill="${color}" fill-opacity="0.15" stroke="none"/>`;
}

function legend(labels: string[], x: number, y: number): string[] {
    return labels.flatMap((label, i) => [
        `<line x1="${x}" y1="${y + i * 16}" x2="${x + 18}" y2="${y + i * 16}" stroke="${PALETTE[i % PALETTE.length]}" stroke-width="2"/>`,
        `<text x="${x + 24}" y="${y + i * 16 + 4}" font-size="11" fill="#111">${esc(label)}</text>`,
    ]);
}

export function renderCurves(series: CurveSeries[], title = "decryption accuracy vs in-context examples"): string {
    const W = 720;
    const H = 440;
    const frame: Frame = {
        x0: 60,
        y0: 30,
        w: W - 80,
        h: H - 80,
        sx: scaleLinear(
            [
                Math.min(...series.map((s) => s.x[0])),
                Math.max(...series.map((s) => s.x[s.x.length - 1])),
            ],
            [60, W - 20],
        ),
        sy: scaleLinear([0, 1], [H - 50, 30]),
    };
    const parts = [
        `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="sans-serif">`,
        `<rect width="${W}" height="${H}" fill="white"/>`,
        ...axes(frame, "in-context examples", "accuracy", title),
    ];
    series.forEach((s, i) => {
        const color = PALETTE[i % PALETTE.length];
        const lo = s.y.map((y, k) => Math.max(0, y - s.stderr[k]));
        const hi = s.y.map((y, k) => Math.min(1, y + s.stderr[k]));
        parts.push(band(s.x, lo, hi, frame.sx, frame.sy, color));
        parts.push(polyline(s.x, s.y, frame.sx, frame.sy, color));
    });
    parts.push(...legend(series.map((s) => s.label), 70, 45));
    parts.push("</svg>");
    return parts.join("\n");
}

export function renderLosses(logs: ParsedLog[]): string {
    const W = 900;
    const H = 400;
    const panels: Array<{ title: string; pick: (l: ParsedLog) => Array<[number, number]> }> = [
        { title: "training loss", pick: (l) => l.points.map((p) => [p.step, p.loss]) },
        {
            title: "validation loss",
            pick: (l) =>
                l.points.filter((p) => p.valLoss !== null).map((p) => [p.step, p.valLoss as number]),
        },
    ];
    const parts = [
        `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="sans-serif">`,
        `<rect width="${W}" height="${H}" fill="white"/>`,
    ];
    panels.forEach((panel, pi) => {
        const data = logs.map((l) => panel.pick(l));
        const all = data.flat();
        if (all.length === 0) {
            parts.push(
                `<text x="${pi * 450 + 225}" y="${H / 2}" font-size="12" text-anchor="middle" fill="#666">no ${panel.title} points</text>`,
            );
            return;
        }
        const xs = all.map((p) => p[0]);
        const ys = all.map((p) => p[1]);
        const pad = (Math.max(...ys) - Math.min(...ys)) * 0.05 || 0.1;
        const frame: Frame = {
            x0: pi * 450 + 60,
            y0: 30,
            w: 360,
            h: H - 80,
            sx: scaleLinear([Math.min(...xs), Math.max(...xs)], [pi * 450 + 60, pi * 450 + 420]),
            sy: scaleLinear([Math.min(...ys) - pad, Math.max(...ys) + pad], [H - 50, 30]),
        };
        parts.push(...axes(frame, "step", "loss", panel.title));
        data.forEach((points, i) => {
            if (points.length === 0) return;
            parts.push(
                polyline(
                    points.map((p) => p[0]),
                    points.map((p) => p[1]),
                    frame.sx,
                    frame.sy,
                    PALETTE[i % PALETTE.length],
                ),
            );
        });
        if (pi === 0) {
            parts.push(...legend(logs.map((l) => l.label), frame.x0 + 10, 45));
        }
    });
    parts.push("</svg>");
    return parts.join("\n");
}
