use std::fmt::Write;

use csitq::asymptotics::{gain_ratio_closed_form, RatioCurve};

pub const CSV_HEADER: &str = "p,classical,ea_rate,ratio";

pub fn curve_csv(curve: &RatioCurve) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in &curve.samples {
        let _ = writeln!(out, "{:e},{:e},{:e},{}", s.p, s.classical, s.ea_rate, s.ratio);
    }
    out
}

const W: f64 = 440.0;
const H: f64 = 320.0;
const PAD_L: f64 = 64.0;
const PAD_R: f64 = 16.0;
const PAD_T: f64 = 28.0;
const PAD_B: f64 = 44.0;

struct Panel {
    x0: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Panel {
    fn px(&self, x: f64) -> f64 {
        self.x0 + PAD_L + (x - self.xr.0) / (self.xr.1 - self.xr.0) * (W - PAD_L - PAD_R)
    }

    fn py(&self, y: f64) -> f64 {
        PAD_T + (self.yr.1 - y) / (self.yr.1 - self.yr.0) * (H - PAD_T - PAD_B)
    }

    fn polyline(&self, out: &mut String, pts: &[(f64, f64)], color: &str, dash: bool) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let dash = if dash { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.8"{dash} points="{}"/>"#,
            coords.join(" ")
        );
    }

    fn frame(&self, out: &mut String, title: &str, y_label: &str, y_ticks: &[(f64, String)]) {
        let (l, r) = (self.px(self.xr.0), self.px(self.xr.1));
        let (t, b) = (self.py(self.yr.1), self.py(self.yr.0));
        let _ = writeln!(
            out,
            r#"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            r - l,
            b - t
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="13">{title}</text>"#,
            (l + r) / 2.0
        );
        let mut e = self.xr.0.ceil() as i32;
        while f64::from(e) <= self.xr.1 {
            let x = self.px(f64::from(e));
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{b:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
                b + 4.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="11">1e{e}</text>"#,
                b + 16.0
            );
            e += 1;
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">p</text>"#,
            (l + r) / 2.0,
            b + 34.0
        );
        for (v, label) in y_ticks {
            let y = self.py(*v);
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{l:.2}" y2="{y:.2}" stroke="black"/>"#,
                l - 4.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{label}</text>"#,
                l - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.2} {:.2})">{y_label}</text>"#,
            self.x0 + 14.0,
            (t + b) / 2.0,
            self.x0 + 14.0,
            (t + b) / 2.0
        );
    }
}

/// Two panels over `log10 p`: both rates on a log scale, and their ratio
/// with the `p -> 0` limit as a dashed line.
pub fn curve_svg(curve: &RatioCurve) -> String {
    let lp: Vec<f64> = curve.samples.iter().map(|s| s.p.log10()).collect();
    let xr = (
        lp.iter().copied().fold(f64::INFINITY, f64::min).floor(),
        lp.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil().max(0.0),
    );
    let xr = if xr.0 == xr.1 { (xr.0 - 1.0, xr.1) } else { xr };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{H}" viewBox="0 0 {} {H}" font-family="sans-serif">"#,
        2.0 * W,
        2.0 * W
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let logs = |f: fn(&csitq::asymptotics::RatioSample) -> f64| -> Vec<(f64, f64)> {
        curve
            .samples
            .iter()
            .zip(&lp)
            .filter(|(s, _)| f(s) > 0.0)
            .map(|(s, &x)| (x, f(s).log10()))
            .collect()
    };
    let cl = logs(|s| s.classical);
    let ea = logs(|s| s.ea_rate);
    let lo = cl.iter().chain(&ea).map(|p| p.1).fold(0.0, f64::min).floor();
    let rates = Panel {
        x0: 0.0,
        xr,
        yr: (lo, 0.0),
    };
    let step = ((-lo) / 6.0).ceil().max(1.0) as i32;
    let ticks: Vec<(f64, String)> = (0..)
        .map(|k| -k * step)
        .take_while(|&e| f64::from(e) >= lo)
        .map(|e| (f64::from(e), format!("1e{e}")))
        .collect();
    rates.frame(&mut out, &format!("rates, K_{}", curve.m), "bits per use", &ticks);
    rates.polyline(&mut out, &cl, "#1f5fbf", false);
    rates.polyline(&mut out, &ea, "#c0392b", false);
    legend(
        &mut out,
        PAD_L + 10.0,
        PAD_T + 16.0,
        &[("classical", "#1f5fbf"), ("with entanglement", "#c0392b")],
    );

    let ratio: Vec<(f64, f64)> = curve.samples.iter().zip(&lp).map(|(s, &x)| (x, s.ratio)).collect();
    let limit = gain_ratio_closed_form(curve.m).unwrap_or(1.0);
    let rmax = ratio.iter().map(|p| p.1).fold(limit, f64::max);
    let rmin = ratio.iter().map(|p| p.1).fold(1.0, f64::min);
    let span = (rmax - rmin).max(1e-3);
    let yr = (rmin - 0.05 * span, rmax + 0.05 * span);
    let gains = Panel { x0: W, xr, yr };
    let ticks: Vec<(f64, String)> = (0..=4)
        .map(|k| {
            let v = yr.0 + (yr.1 - yr.0) * f64::from(k) / 4.0;
            (v, format!("{v:.3}"))
        })
        .collect();
    gains.frame(&mut out, "gain ratio", "ratio", &ticks);
    gains.polyline(&mut out, &[(xr.0, limit), (xr.1, limit)], "#555555", true);
    gains.polyline(&mut out, &ratio, "#2c7a3f", false);
    legend(
        &mut out,
        W + PAD_L + 10.0,
        H - PAD_B - 28.0,
        &[("ratio", "#2c7a3f"), ("p -> 0 limit", "#555555")],
    );

    out.push_str("</svg>\n");
    out
}

fn legend(out: &mut String, x: f64, top: f64, items: &[(&str, &str)]) {
    for (k, (label, color)) in items.iter().enumerate() {
        let y = top + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/>"#,
            x + 18.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11">{label}</text>"#,
            x + 24.0,
            y + 4.0
        );
    }
}
