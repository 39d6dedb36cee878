//! Deterministic SVG rendering: heatmaps, small multiples, layered
//! connectivity graphs, scatter and line plots.

use std::fmt::Write as _;

const FONT: &str = "font-family=\"sans-serif\" font-size=\"11\"";
const MARGIN: f64 = 30.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Svg {
            body: String::new(),
            width,
            height,
        }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: Option<&str>) {
        write!(
            self.body,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\""
        )
        .unwrap();
        if let Some(s) = stroke {
            write!(self.body, " stroke=\"{s}\"").unwrap();
        }
        self.body.push_str("/>\n");
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64, dashed: bool) {
        write!(
            self.body,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"{stroke}\" stroke-width=\"{width:.2}\""
        )
        .unwrap();
        if dashed {
            self.body.push_str(" stroke-dasharray=\"4 3\"");
        }
        self.body.push_str("/>\n");
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        writeln!(
            self.body,
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r:.2}\" fill=\"{fill}\" stroke=\"black\" stroke-width=\"0.5\"/>"
        )
        .unwrap();
    }

    fn dot(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        writeln!(self.body, "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r:.2}\" fill=\"{fill}\"/>").unwrap();
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        writeln!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\" {FONT}>{}</text>",
            escape(s)
        )
        .unwrap();
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str) {
        self.body.push_str("<polyline fill=\"none\" stroke=\"");
        self.body.push_str(stroke);
        self.body.push_str("\" stroke-width=\"1.2\" points=\"");
        for (i, (x, y)) in pts.iter().enumerate() {
            if i > 0 {
                self.body.push(' ');
            }
            write!(self.body, "{x:.2},{y:.2}").unwrap();
        }
        self.body.push_str("\"/>\n");
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// White (0) to dark blue (1).
fn shade(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let r = (255.0 * (1.0 - t) + 8.0 * t).round() as u8;
    let g = (255.0 * (1.0 - t) + 48.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t) + 107.0 * t).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Row-major `rows x cols` grid, row 0 drawn at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub title: String,
}

fn draw_grid(svg: &mut Svg, g: &Grid, x0: f64, y0: f64, cell: f64, max: f64) {
    for r in 0..g.rows {
        for c in 0..g.cols {
            let v = g.values[r * g.cols + c];
            if v > 0.0 && max > 0.0 {
                svg.rect(x0 + c as f64 * cell, y0 + r as f64 * cell, cell, cell, &shade(v / max), None);
            }
        }
    }
    svg.rect(x0, y0, g.cols as f64 * cell, g.rows as f64 * cell, "none", Some("black"));
    svg.text(x0 + g.cols as f64 * cell / 2.0, y0 - 6.0, "middle", &g.title);
}

/// One heatmap; each value is a `cell x cell` pixel square. An all-zero
/// grid draws empty axes.
pub fn heatmap_svg(g: &Grid, cell: f64, xlabel: &str, ylabel: &str) -> String {
    let w = g.cols as f64 * cell + 2.0 * MARGIN;
    let h = g.rows as f64 * cell + 2.0 * MARGIN;
    let mut svg = Svg::new(w, h);
    let max = g.values.iter().cloned().fold(0.0, f64::max);
    draw_grid(&mut svg, g, MARGIN, MARGIN, cell, max);
    svg.text(w / 2.0, h - 8.0, "middle", xlabel);
    svg.text(10.0, h / 2.0, "middle", ylabel);
    svg.finish()
}

/// Heatmaps side by side, each scaled to its own maximum unless
/// `shared_scale`.
pub fn small_multiples_svg(grids: &[Grid], per_row: usize, cell: f64, shared_scale: bool, title: &str) -> String {
    let per_row = per_row.max(1);
    let (rows, cols) = grids
        .first()
        .map_or((0, 0), |g| (g.rows, g.cols));
    let pw = cols as f64 * cell + 20.0;
    let ph = rows as f64 * cell + 28.0;
    let nrow = grids.len().div_ceil(per_row).max(1);
    let w = per_row.min(grids.len().max(1)) as f64 * pw + 2.0 * MARGIN;
    let h = nrow as f64 * ph + 2.0 * MARGIN;
    let mut svg = Svg::new(w, h);
    svg.text(w / 2.0, 16.0, "middle", title);
    let global = grids
        .iter()
        .flat_map(|g| g.values.iter().cloned())
        .fold(0.0, f64::max);
    for (i, g) in grids.iter().enumerate() {
        let x0 = MARGIN + (i % per_row) as f64 * pw;
        let y0 = MARGIN + 14.0 + (i / per_row) as f64 * ph;
        let max = if shared_scale {
            global
        } else {
            g.values.iter().cloned().fold(0.0, f64::max)
        };
        draw_grid(&mut svg, g, x0, y0, cell, max);
    }
    svg.finish()
}

/// Layered graph. `layers[l]` holds node labels in display order;
/// `edges[l]` connects layer `l` to `l + 1` as
/// `(lower position, upper position, value)`. Negative values are dashed.
pub fn layered_graph_svg(layers: &[Vec<String>], edges: &[Vec<(usize, usize, f64)>], title: &str) -> String {
    let widest = layers.iter().map(Vec::len).max().unwrap_or(1).max(1);
    let dx = 28.0;
    let dy = 90.0;
    let w = widest as f64 * dx + 2.0 * MARGIN + 40.0;
    let h = layers.len().max(1) as f64 * dy + MARGIN;
    let mut svg = Svg::new(w, h);
    svg.text(w / 2.0, 16.0, "middle", title);
    let pos = |l: usize, i: usize| {
        let n = layers[l].len() as f64;
        let x = w / 2.0 + (i as f64 - (n - 1.0) / 2.0) * dx;
        let y = h - MARGIN - l as f64 * dy + 10.0;
        (x, y)
    };
    let max = edges
        .iter()
        .flatten()
        .fold(0.0f64, |a, e| a.max(e.2.abs()));
    for (l, es) in edges.iter().enumerate() {
        for &(lo, hi, v) in es {
            let (x1, y1) = pos(l, lo);
            let (x2, y2) = pos(l + 1, hi);
            let width = if max > 0.0 { 0.3 + 2.2 * v.abs() / max } else { 0.3 };
            svg.line(x1, y1, x2, y2, "#333333", width, v < 0.0);
        }
    }
    for (l, nodes) in layers.iter().enumerate() {
        for (i, label) in nodes.iter().enumerate() {
            let (x, y) = pos(l, i);
            svg.circle(x, y, 7.0, "#dddddd");
            svg.text(x, y + 3.5, "middle", label);
        }
        let (x, y) = pos(l, 0);
        svg.text(x - 20.0, y + 4.0, "end", &format!("L{l}"));
    }
    svg.finish()
}

/// 2-D points coloured by class.
pub fn scatter_svg(points: &[(f64, f64)], classes: &[usize], size: f64, title: &str) -> String {
    let w = size + 2.0 * MARGIN;
    let mut svg = Svg::new(w, w);
    svg.text(w / 2.0, 16.0, "middle", title);
    let extent = points
        .iter()
        .fold(0.0f64, |a, p| a.max(p.0.abs()).max(p.1.abs()))
        .max(1e-12)
        * 1.1;
    svg.rect(MARGIN, MARGIN, size, size, "none", Some("black"));
    let map = |v: f64| MARGIN + (v / extent + 1.0) / 2.0 * size;
    for (p, &c) in points.iter().zip(classes) {
        svg.dot(map(p.0), MARGIN + size - (map(p.1) - MARGIN), 2.0, PALETTE[c % PALETTE.len()]);
    }
    svg.finish()
}

/// Line plot of one or more series against their index.
pub fn line_svg(series: &[(String, Vec<f64>)], width: f64, height: f64, title: &str) -> String {
    let w = width + 2.0 * MARGIN + 60.0;
    let h = height + 2.0 * MARGIN;
    let mut svg = Svg::new(w, h);
    svg.text(w / 2.0, 16.0, "middle", title);
    svg.rect(MARGIN, MARGIN, width, height, "none", Some("black"));
    let len = series.iter().map(|s| s.1.len()).max().unwrap_or(0);
    let (lo, hi) = series
        .iter()
        .flat_map(|s| s.1.iter().cloned())
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if len >= 2 && lo.is_finite() {
        let span = if hi > lo { hi - lo } else { 1.0 };
        for (k, (name, ys)) in series.iter().enumerate() {
            let pts: Vec<(f64, f64)> = ys
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let x = MARGIN + i as f64 / (len - 1) as f64 * width;
                    let y = MARGIN + height - (v - lo) / span * height;
                    (x, y)
                })
                .collect();
            let colour = PALETTE[k % PALETTE.len()];
            svg.polyline(&pts, colour);
            svg.text(MARGIN + width + 6.0, MARGIN + 14.0 * (k + 1) as f64, "start", name);
        }
        svg.text(MARGIN - 4.0, MARGIN + 4.0, "end", &format!("{hi:.3}"));
        svg.text(MARGIN - 4.0, MARGIN + height, "end", &format!("{lo:.3}"));
    }
    svg.finish()
}
