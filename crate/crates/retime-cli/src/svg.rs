//! Minimal deterministic SVG line plots: fixed canvas, fixed palette,
//! no timestamps or generator metadata, so identical inputs produce
//! byte-identical files.

use crate::error::{AppError, AppResult};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl Plot {
    pub fn render(&self) -> AppResult<String> {
        if self.series.is_empty() {
            return Err(AppError::runtime("no series to plot"));
        }
        let mut xs_min = f64::INFINITY;
        let mut xs_max = f64::NEG_INFINITY;
        let mut ys_min = f64::INFINITY;
        let mut ys_max = f64::NEG_INFINITY;
        for s in &self.series {
            if s.xs.len() != s.ys.len() || s.xs.is_empty() {
                return Err(AppError::runtime(format!(
                    "series '{}' is empty or ragged",
                    s.label
                )));
            }
            for (&x, &y) in s.xs.iter().zip(s.ys.iter()) {
                if !x.is_finite() || !y.is_finite() {
                    return Err(AppError::runtime(format!(
                        "series '{}' contains non-finite values",
                        s.label
                    )));
                }
                let yv = if self.log_y {
                    if y <= 0.0 {
                        return Err(AppError::runtime(format!(
                            "log-scale plot rejects nonpositive value {y} in series '{}'",
                            s.label
                        )));
                    }
                    y.log10()
                } else {
                    y
                };
                xs_min = xs_min.min(x);
                xs_max = xs_max.max(x);
                ys_min = ys_min.min(yv);
                ys_max = ys_max.max(yv);
            }
        }
        if xs_max <= xs_min {
            xs_max = xs_min + 1.0;
        }
        if ys_max <= ys_min {
            ys_max = ys_min + 1.0;
        }

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let to_px = |x: f64, y: f64| -> (f64, f64) {
            let px = MARGIN_LEFT + (x - xs_min) / (xs_max - xs_min) * plot_w;
            let py = MARGIN_TOP + (1.0 - (y - ys_min) / (ys_max - ys_min)) * plot_h;
            (px, py)
        };

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"20\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        ));

        // Frame.
        svg.push_str(&format!(
            "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"black\"/>\n"
        ));

        // Ticks and labels.
        for i in 0..=4 {
            let fx = i as f64 / 4.0;
            let xv = xs_min + fx * (xs_max - xs_min);
            let (px, _) = to_px(xv, ys_min);
            svg.push_str(&format!(
                "<line x1=\"{px:.2}\" y1=\"{}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"black\"/>\n",
                MARGIN_TOP + plot_h,
                MARGIN_TOP + plot_h + 5.0
            ));
            svg.push_str(&format!(
                "<text x=\"{px:.2}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                MARGIN_TOP + plot_h + 18.0,
                format_tick(xv)
            ));
            let yv = ys_min + fx * (ys_max - ys_min);
            let (_, py) = to_px(xs_min, yv);
            svg.push_str(&format!(
                "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{MARGIN_LEFT}\" y2=\"{py:.2}\" stroke=\"black\"/>\n",
                MARGIN_LEFT - 5.0
            ));
            let label = if self.log_y {
                format!("1e{}", format_tick(yv))
            } else {
                format_tick(yv)
            };
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{label}</text>\n",
                MARGIN_LEFT - 8.0,
                py + 4.0
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        ));
        svg.push_str(&format!(
            "<text x=\"16\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        ));

        // Lines plus legend.
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let mut points = String::new();
            for (&x, &y) in s.xs.iter().zip(s.ys.iter()) {
                let yv = if self.log_y { y.log10() } else { y };
                let (px, py) = to_px(x, yv);
                points.push_str(&format!("{px:.2},{py:.2} "));
            }
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                points.trim_end()
            ));
            let ly = MARGIN_TOP + 16.0 + 16.0 * i as f64;
            svg.push_str(&format!(
                "<line x1=\"{}\" y1=\"{ly:.2}\" x2=\"{}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                MARGIN_LEFT + 10.0,
                MARGIN_LEFT + 34.0
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\">{}</text>\n",
                MARGIN_LEFT + 40.0,
                ly + 4.0,
                escape(&s.label)
            ));
        }
        svg.push_str("</svg>\n");
        Ok(svg)
    }

    /// The plotted series as CSV: `x,<label1>,<label2>,...` (series are
    /// expected to share their x grid; ragged series are an error).
    pub fn series_csv(&self) -> AppResult<String> {
        let n = self.series[0].xs.len();
        for s in &self.series {
            if s.xs.len() != n {
                return Err(AppError::runtime(
                    "series CSV requires a shared x grid".to_string(),
                ));
            }
        }
        let mut out = String::from("x");
        for s in &self.series {
            out.push(',');
            out.push_str(&s.label);
        }
        out.push('\n');
        for i in 0..n {
            out.push_str(&format!("{}", self.series[0].xs[i]));
            for s in &self.series {
                out.push_str(&format!(",{}", s.ys[i]));
            }
            out.push('\n');
        }
        Ok(out)
    }
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let abs = v.abs();
    if (1e-3..1e4).contains(&abs) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
