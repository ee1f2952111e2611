//! Composite Gauss-Legendre rules in a panel variable `v` (with `x = map(v)`)
//! and nested integration over the ordered simplex `x_1 < ... < x_N`.

use crate::gauss::legendre_cached;
use crate::operator::NodeMap;

#[derive(Debug, Clone)]
pub(crate) struct Panels {
    pub edges: Vec<f64>,
    pub q: usize,
    pub map: NodeMap,
}

/// A node `(v, x, w)` with `w` the weight for integration in `x`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Node {
    pub v: f64,
    pub x: f64,
    pub w: f64,
}

impl Panels {
    /// Edges covering `[a, b]` in steps of about `h`, with geometric
    /// refinement towards `a` when `grade` is set.
    pub fn new(a: f64, b: f64, h: f64, q: usize, map: NodeMap, grade: bool) -> Self {
        let mut edges = vec![a];
        let mut start = a;
        if grade {
            let first = (a + h).min(b);
            let mut lv = Vec::new();
            let mut d = first - a;
            for _ in 0..10 {
                d *= 0.25;
                lv.push(a + d);
            }
            edges.extend(lv.into_iter().rev());
            start = first;
            edges.push(first);
        }
        let m = ((b - start) / h).ceil().max(if start < b { 1.0 } else { 0.0 }) as usize;
        for k in 1..=m {
            edges.push(start + (b - start) * k as f64 / m as f64);
        }
        Panels { edges, q, map }
    }

    fn push_panel(&self, l: f64, r: f64, out: &mut Vec<Node>) {
        let rule = legendre_cached(self.q);
        let h = 0.5 * (r - l);
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let v = l + h * (t + 1.0);
            let (x, dx) = self.map.apply(v);
            out.push(Node { v, x, w: h * w * dx });
        }
    }

    pub fn nodes(&self) -> Vec<Node> {
        let mut out = Vec::new();
        for e in self.edges.windows(2) {
            self.push_panel(e[0], e[1], &mut out);
        }
        out
    }

    /// Rule on `[edges[0], vmax]`: the full panels below `vmax` plus the
    /// partial one containing it.
    pub fn nodes_below(&self, vmax: f64) -> Vec<Node> {
        let mut out = Vec::new();
        for e in self.edges.windows(2) {
            if e[0] >= vmax {
                break;
            }
            self.push_panel(e[0], e[1].min(vmax), &mut out);
        }
        out
    }
}

/// `∫_{x_1<...<x_dim} f(x) dx` by nested composite rules.
pub(crate) fn ordered_integral(p: &Panels, dim: usize, f: &mut dyn FnMut(&[f64]) -> f64) -> f64 {
    let mut xs = vec![0.0; dim];
    rec(p, dim, None, &mut xs, f)
}

fn rec(p: &Panels, level: usize, vmax: Option<f64>, xs: &mut [f64], f: &mut dyn FnMut(&[f64]) -> f64) -> f64 {
    if level == 0 {
        return f(xs);
    }
    let nodes = match vmax {
        None => p.nodes(),
        Some(v) => p.nodes_below(v),
    };
    let mut s = 0.0;
    for nd in nodes {
        xs[level - 1] = nd.x;
        s += nd.w * rec(p, level - 1, Some(nd.v), xs, f);
    }
    s
}
