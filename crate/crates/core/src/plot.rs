//! Scatter plots of sensitivity CSV output as self-contained SVG documents.
//! The y axis is always log-scaled; the x axis is log-scaled for rho and
//! conditioning sweeps and linear for degree sweeps. Rendering is
//! deterministic: identical input bytes yield identical output bytes.

use std::fmt::Write as _;
use std::io::Read;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    Degree,
    Rho,
    CondInfA,
}

impl XAxis {
    pub fn from_flag(s: &str) -> Result<Self> {
        match s {
            "k" => Ok(XAxis::Degree),
            "rho" => Ok(XAxis::Rho),
            "cond" => Ok(XAxis::CondInfA),
            other => Err(Error::InvalidConfig(format!(
                "x axis must be one of k, rho, cond; got `{other}`"
            ))),
        }
    }

    pub fn column(&self) -> &'static str {
        match self {
            XAxis::Degree => "k",
            XAxis::Rho => "rho",
            XAxis::CondInfA => "cond_inf_A",
        }
    }

    pub fn log_scaled(&self) -> bool {
        !matches!(self, XAxis::Degree)
    }
}

#[derive(Debug, Clone)]
pub struct PlotData {
    pub x_axis: XAxis,
    /// (x, q_exact) pairs.
    pub points: Vec<(f64, f64)>,
    /// (x, upper bound) pairs when bounds were requested.
    pub bounds: Vec<(f64, f64)>,
}

/// Extracts plot series from CSV in the standard schema. Fails when the
/// header lacks the x column, `q_exact`, or (with `with_bounds`) `upper`.
/// Cell-level garbage is skipped row-wise rather than fatal.
pub fn read_plot_data<R: Read>(reader: R, x_axis: XAxis, with_bounds: bool) -> Result<PlotData> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let xi = find(x_axis.column())?;
    let qi = find("q_exact")?;
    let ui = if with_bounds { Some(find("upper")?) } else { None };

    let mut points = Vec::new();
    let mut bounds = Vec::new();
    for rec in rdr.records() {
        let rec = match rec {
            Ok(r) => r,
            Err(_) => continue,
        };
        let cell = |i: usize| rec.get(i).and_then(|s| s.trim().parse::<f64>().ok());
        let (Some(x), Some(q)) = (cell(xi), cell(qi)) else {
            continue;
        };
        points.push((x, q));
        if let Some(ui) = ui {
            if let Some(u) = cell(ui) {
                bounds.push((x, u));
            }
        }
    }
    Ok(PlotData {
        x_axis,
        points,
        bounds,
    })
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 50.0;

struct Scale {
    min: f64,
    max: f64,
    log: bool,
}

impl Scale {
    fn build(values: impl Iterator<Item = f64>, log: bool) -> Scale {
        let usable: Vec<f64> = values
            .filter(|v| v.is_finite() && (!log || *v > 0.0))
            .collect();
        if usable.is_empty() {
            // One decade (or one unit) starting at the origin.
            return Scale { min: 0.0, max: 1.0, log };
        }
        let lo = usable.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = usable.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if log {
            let mut min = lo.log10().floor();
            let mut max = hi.log10().ceil();
            if min == max {
                min -= 1.0;
                max += 1.0;
            }
            Scale { min, max, log }
        } else {
            let (mut min, mut max) = (lo.floor(), hi.ceil());
            if min == max {
                min -= 1.0;
                max += 1.0;
            }
            Scale { min, max, log }
        }
    }

    /// Position in [0, 1]; None for values unrepresentable on the scale.
    fn unit(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        let t = if self.log { v.log10() } else { v };
        Some((t - self.min) / (self.max - self.min))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        let span = self.max - self.min;
        let step = (span / 8.0).ceil().max(1.0);
        let mut out = Vec::new();
        let mut t = self.min;
        while t <= self.max + 1e-9 {
            let label = if self.log {
                format!("1e{}", t as i64)
            } else {
                format!("{}", t as i64)
            };
            out.push(((t - self.min) / span, label));
            t += step;
        }
        out
    }
}

/// Renders the scatter plot. Data points are filled circles; upper-bound
/// values, when present, are drawn as open circles.
pub fn render_svg(data: &PlotData) -> String {
    let x_log = data.x_axis.log_scaled();
    let xs = data
        .points
        .iter()
        .map(|p| p.0)
        .chain(data.bounds.iter().map(|p| p.0));
    let ys = data
        .points
        .iter()
        .map(|p| p.1)
        .chain(data.bounds.iter().map(|p| p.1));
    let sx = Scale::build(xs, x_log);
    let sy = Scale::build(ys, true);

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let px = |u: f64| MARGIN_L + u * plot_w;
    let py = |u: f64| HEIGHT - MARGIN_B - u * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // Axes.
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
        px(0.0),
        py(0.0),
        px(1.0),
        py(0.0)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
        px(0.0),
        py(0.0),
        px(0.0),
        py(1.0)
    );

    for (u, label) in sx.ticks() {
        let x = px(u);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black" stroke-width="0.5"/>"#,
            py(0.0),
            py(0.0) + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-size="12" text-anchor="middle" font-family="monospace">{label}</text>"#,
            py(0.0) + 20.0
        );
    }
    for (u, label) in sy.ticks() {
        let y = py(u);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black" stroke-width="0.5"/>"#,
            px(0.0) - 5.0,
            px(0.0)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end" font-family="monospace">{label}</text>"#,
            px(0.0) - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle" font-family="monospace">{}</text>"#,
        px(0.5),
        HEIGHT - 12.0,
        data.x_axis.column()
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" font-family="monospace" transform="rotate(-90 16 {:.2})">q</text>"#,
        py(0.5),
        py(0.5)
    );

    for (x, y) in &data.points {
        if let (Some(ux), Some(uy)) = (sx.unit(*x), sy.unit(*y)) {
            let _ = writeln!(
                s,
                r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f6fb2"/>"##,
                px(ux),
                py(uy)
            );
        }
    }
    for (x, y) in &data.bounds {
        if let (Some(ux), Some(uy)) = (sx.unit(*x), sy.unit(*y)) {
            let _ = writeln!(
                s,
                r##"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="none" stroke="#c23b22" stroke-width="1.2"/>"##,
                px(ux),
                py(uy)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "experiment,trial,seed,k,n,scheme,cond_inf_A,det_abs,rho,rho_tilde,alpha_re,alpha_im,beta_re,beta_im,gamma_re,gamma_im,delta_re,delta_im,kappa_P,kappa_MAP,q_exact,q_direct,lower,upper,lower_sharp,upper_sharp,simple_flag";

    fn row(k: usize, cond: f64, q: f64, upper: f64) -> String {
        format!("1,0,7,{k},5,polynorm,{cond},1.0,1.0,1.0,1,0,0,0,1,0,0,0,1,1,{q},{q},0.1,{upper},0.2,{upper},true")
    }

    #[test]
    fn reads_series_and_bounds() {
        let csv = format!("{HEADER}\n{}\n{}\n", row(2, 1.5, 3.0, 100.0), row(3, 1.9, 5.0, 400.0));
        let data = read_plot_data(csv.as_bytes(), XAxis::Degree, true).unwrap();
        assert_eq!(data.points, vec![(2.0, 3.0), (3.0, 5.0)]);
        assert_eq!(data.bounds, vec![(2.0, 100.0), (3.0, 400.0)]);
        let data = read_plot_data(csv.as_bytes(), XAxis::CondInfA, false).unwrap();
        assert_eq!(data.points[0].0, 1.5);
        assert!(data.bounds.is_empty());
    }

    #[test]
    fn missing_column_is_an_error() {
        let csv = "a,b\n1,2\n";
        assert!(matches!(
            read_plot_data(csv.as_bytes(), XAxis::Rho, false),
            Err(Error::MissingColumn(_))
        ));
    }

    #[test]
    fn empty_csv_renders_axes_only() {
        let csv = format!("{HEADER}\n");
        let data = read_plot_data(csv.as_bytes(), XAxis::Rho, true).unwrap();
        let svg = render_svg(&data);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(!svg.contains("fill=\"#1f6fb2\""));
    }

    #[test]
    fn rendering_is_deterministic_and_skips_unloggable_values() {
        let csv = format!(
            "{HEADER}\n{}\n{}\n{}\n",
            row(2, 1.5, 3.0, 100.0),
            row(2, 1.5, -1.0, 100.0), // negative q cannot appear on a log axis
            row(2, 1.5, f64::NAN, 100.0326),
        );
        let data = read_plot_data(csv.as_bytes(), XAxis::Degree, false).unwrap();
        let s1 = render_svg(&data);
        let s2 = render_svg(&data);
        assert_eq!(s1, s2);
        assert_eq!(s1.matches("fill=\"#1f6fb2\"").count(), 1);
    }
}
