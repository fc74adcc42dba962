//! Marching-squares contours and a minimal SVG writer.

use starset::metrics::format_sig;

pub const CONTOUR_GRID: usize = 512;
const CANVAS: f64 = 600.0;

/// Line segments of the zero level set of `field` over `bounds`, sampled on a
/// `res x res` cell grid. Saddle cells are resolved by the centre value.
pub fn marching_squares<F: Fn(&[f64]) -> f64>(field: F, bounds: &[(f64, f64); 2], res: usize) -> Vec<[[f64; 2]; 2]> {
    let (x0, x1) = bounds[0];
    let (y0, y1) = bounds[1];
    let dx = (x1 - x0) / res as f64;
    let dy = (y1 - y0) / res as f64;
    let pt = |i: usize, j: usize| [x0 + i as f64 * dx, y0 + j as f64 * dy];
    let vals: Vec<Vec<f64>> = (0..=res).map(|j| (0..=res).map(|i| field(&pt(i, j))).collect()).collect();
    let lerp = |a: [f64; 2], va: f64, b: [f64; 2], vb: f64| {
        let t = if va == vb { 0.5 } else { va / (va - vb) };
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    };
    let mut segs = Vec::new();
    for j in 0..res {
        for i in 0..res {
            // corners counterclockwise from bottom-left
            let c = [pt(i, j), pt(i + 1, j), pt(i + 1, j + 1), pt(i, j + 1)];
            let v = [vals[j][i], vals[j][i + 1], vals[j + 1][i + 1], vals[j + 1][i]];
            let inside: Vec<bool> = v.iter().map(|&x| x <= 0.0).collect();
            let mut crossings = Vec::with_capacity(4);
            for e in 0..4 {
                let (a, b) = (e, (e + 1) % 4);
                if inside[a] != inside[b] {
                    crossings.push((e, lerp(c[a], v[a], c[b], v[b])));
                }
            }
            match crossings.len() {
                2 => segs.push([crossings[0].1, crossings[1].1]),
                4 => {
                    let centre = field(&[c[0][0] + 0.5 * dx, c[0][1] + 0.5 * dy]);
                    // the corners sharing the centre's side stay connected
                    if (centre <= 0.0) == inside[1] {
                        segs.push([crossings[0].1, crossings[3].1]);
                        segs.push([crossings[1].1, crossings[2].1]);
                    } else {
                        segs.push([crossings[0].1, crossings[1].1]);
                        segs.push([crossings[2].1, crossings[3].1]);
                    }
                }
                _ => {}
            }
        }
    }
    segs
}

/// SVG document mapping `bounds` onto a square canvas with the y axis pointing up.
pub struct Svg {
    bounds: [(f64, f64); 2],
    body: String,
}

impl Svg {
    pub fn new(bounds: [(f64, f64); 2]) -> Self {
        Svg {
            bounds,
            body: String::new(),
        }
    }

    fn map(&self, p: &[f64]) -> (String, String) {
        let (x0, x1) = self.bounds[0];
        let (y0, y1) = self.bounds[1];
        let sx = CANVAS * (p[0] - x0) / (x1 - x0);
        let sy = CANVAS * (1.0 - (p[1] - y0) / (y1 - y0));
        (format_sig(sx, 9), format_sig(sy, 9))
    }

    pub fn segments(&mut self, segs: &[[[f64; 2]; 2]], colour: &str, label: &str) {
        let mut d = String::new();
        for s in segs {
            let (ax, ay) = self.map(&s[0]);
            let (bx, by) = self.map(&s[1]);
            d.push_str(&format!("M{ax} {ay}L{bx} {by}"));
        }
        self.body.push_str(&format!(
            "<path class=\"{label}\" d=\"{d}\" stroke=\"{colour}\" stroke-width=\"1.5\" fill=\"none\"/>\n"
        ));
    }

    pub fn polygon(&mut self, vertices: &[Vec<f64>], colour: &str, label: &str) {
        let pts: Vec<String> = vertices
            .iter()
            .map(|v| {
                let (x, y) = self.map(v);
                format!("{x},{y}")
            })
            .collect();
        self.body.push_str(&format!(
            "<polygon class=\"{label}\" points=\"{}\" stroke=\"{colour}\" stroke-width=\"1.5\" fill=\"{colour}\" fill-opacity=\"0.2\"/>\n",
            pts.join(" ")
        ));
    }

    pub fn point(&mut self, p: &[f64], colour: &str, label: &str) {
        let (x, y) = self.map(p);
        self.body.push_str(&format!("<circle class=\"{label}\" cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"{colour}\"/>\n"));
    }

    pub fn finish(&self, title: &str) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{c}\" height=\"{c}\" viewBox=\"0 0 {c} {c}\">\n\
             <title>{title}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            c = CANVAS
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_contour_lies_on_circle() {
        let segs = marching_squares(|x| x[0] * x[0] + x[1] * x[1] - 1.0, &[(-1.5, 1.5), (-1.5, 1.5)], 64);
        assert!(segs.len() > 100);
        for s in &segs {
            for p in s {
                assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < 0.01);
            }
        }
    }

    #[test]
    fn empty_field_has_no_contour() {
        assert!(marching_squares(|_| 1.0, &[(0.0, 1.0), (0.0, 1.0)], 16).is_empty());
    }

    #[test]
    fn svg_maps_y_up() {
        let mut svg = Svg::new([(0.0, 1.0), (0.0, 1.0)]);
        svg.point(&[0.0, 1.0], "red", "p");
        assert!(svg.finish("t").contains("cx=\"0\" cy=\"0\""));
    }
}
