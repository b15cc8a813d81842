use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::CliError;

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with the generating config in leading `#` lines.
pub fn write_csv(path: &Path, echo: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut s = String::new();
    for line in echo.lines() {
        let _ = writeln!(s, "# {line}");
    }
    s.push_str(&header.join(","));
    s.push_str("\r\n");
    for r in rows {
        s.push_str(&r.join(","));
        s.push_str("\r\n");
    }
    fs::write(path, s)?;
    Ok(())
}

/// Binary PGM; `rows` are listed top to bottom.
pub fn write_pgm(path: &Path, echo: &str, width: usize, rows: &[Vec<u8>]) -> Result<(), CliError> {
    let mut out = Vec::with_capacity(width * rows.len() + 256);
    out.extend_from_slice(b"P5\n");
    for line in echo.lines() {
        out.extend_from_slice(format!("# {line}\n").as_bytes());
    }
    out.extend_from_slice(format!("{width} {}\n255\n", rows.len()).as_bytes());
    for r in rows {
        out.extend_from_slice(r);
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_text(path: &Path, echo: &str, body: &str) -> Result<(), CliError> {
    let mut s = String::new();
    for line in echo.lines() {
        let _ = writeln!(s, "# {line}");
    }
    s.push_str(body);
    fs::write(path, s)?;
    Ok(())
}

enum Shape {
    Polyline { points: Vec<(f64, f64)>, color: String },
    Circle { center: (f64, f64), radius: f64, color: String },
}

/// Minimal SVG 1.1 plot in data coordinates (y up).
#[derive(Default)]
pub struct Svg {
    shapes: Vec<Shape>,
}

impl Svg {
    pub fn polyline(&mut self, points: Vec<(f64, f64)>, color: &str) {
        if points.len() >= 2 {
            self.shapes.push(Shape::Polyline { points, color: color.into() });
        }
    }

    pub fn circle(&mut self, center: (f64, f64), radius: f64, color: &str) {
        self.shapes.push(Shape::Circle { center, radius, color: color.into() });
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut add = |x: f64, y: f64| {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        };
        for s in &self.shapes {
            match s {
                Shape::Polyline { points, .. } => points.iter().for_each(|&(x, y)| add(x, y)),
                Shape::Circle { center, radius, .. } => {
                    add(center.0 - radius, center.1 - radius);
                    add(center.0 + radius, center.1 + radius);
                }
            }
        }
        if !x0.is_finite() {
            return (-1.0, -1.0, 1.0, 1.0);
        }
        let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-9);
        (x0 - pad, y0 - pad, x1 + pad, y1 + pad)
    }

    pub fn write(&self, path: &Path, echo: &str) -> Result<(), CliError> {
        let (x0, y0, x1, y1) = self.bounds();
        let size = 800.0;
        let scale = size / (x1 - x0).max(y1 - y0);
        let (w, h) = ((x1 - x0) * scale, (y1 - y0) * scale);
        let px = |x: f64, y: f64| ((x - x0) * scale, (y1 - y) * scale);
        let mut s = String::new();
        s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        // "--" may not appear inside an XML comment
        let _ = writeln!(s, "<!-- {} -->", echo.replace("--", "- -"));
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w:.1}\" height=\"{h:.1}\" viewBox=\"0 0 {w:.3} {h:.3}\">"
        );
        let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        for shape in &self.shapes {
            match shape {
                Shape::Polyline { points, color } => {
                    let pts: Vec<String> = points
                        .iter()
                        .map(|&(x, y)| {
                            let (a, b) = px(x, y);
                            format!("{a:.3},{b:.3}")
                        })
                        .collect();
                    let _ = writeln!(
                        s,
                        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
                        pts.join(" ")
                    );
                }
                Shape::Circle { center, radius, color } => {
                    let (a, b) = px(center.0, center.1);
                    let _ = writeln!(
                        s,
                        "<circle cx=\"{a:.3}\" cy=\"{b:.3}\" r=\"{:.3}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                        radius * scale
                    );
                }
            }
        }
        s.push_str("</svg>\n");
        fs::write(path, s)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
    }
}
