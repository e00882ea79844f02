//! Adaptive quadrature used to assemble the limit covariance.
//!
//! The primary scheme is 1D adaptive Gauss-Kronrod (G7/K15) with interval
//! subdivision driven by a worst-error heap; the integrands have at most a
//! mild endpoint singularity (-log u, or u^beta with beta > -1), so the
//! seed partition is graded toward the singular endpoint. A tensor-product
//! 2D adaptive rule over squares is kept as a fallback route for the double
//! integrals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7/K15 evaluation over [a, b]: returns (kronrod, error_estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[i] * (f1 + f2);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    kronrod *= half;
    gauss *= half;
    let diff = (kronrod - gauss).abs();
    // the customary (200 |K-G|)^{3/2} sharpening is unnecessary here; the
    // plain difference is a safe overestimate
    (kronrod, diff)
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

/// Adaptive integral of `f` over [a, b] to relative tolerance `tol`.
///
/// `grade_toward_a` seeds the partition with geometrically shrinking
/// intervals near `a` for integrable endpoint singularities. The budget is
/// counted in kernel evaluations (15 per panel).
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    budget: u64,
    grade_toward_a: bool,
) -> Result<f64> {
    assert!(b > a && tol > 0.0);
    let mut evals: u64 = 0;
    let mut heap = BinaryHeap::new();
    let push = |heap: &mut BinaryHeap<Interval>, lo: f64, hi: f64, evals: &mut u64| {
        let (value, error) = gk15(f, lo, hi);
        *evals += 15;
        heap.push(Interval {
            a: lo,
            b: hi,
            value,
            error,
        });
    };

    if grade_toward_a {
        // [a + w/2^30, b], halving toward a, plus the innermost sliver
        let width = b - a;
        let mut hi = b;
        for k in 1..=30 {
            let lo = a + width * 0.5f64.powi(k);
            push(&mut heap, lo, hi, &mut evals);
            hi = lo;
        }
        push(&mut heap, a, hi, &mut evals);
    } else {
        push(&mut heap, a, b, &mut evals);
    }

    loop {
        let total: f64 = heap.iter().map(|iv| iv.value).sum();
        let total_err: f64 = heap.iter().map(|iv| iv.error).sum();
        let target = tol * total.abs().max(1e-2);
        if total_err <= target {
            return Ok(total);
        }
        if evals + 30 > budget {
            return Err(Error::QuadratureNonConvergence { tol, budget });
        }
        let worst = heap.pop().expect("heap nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // interval no longer splittable in f64; accept its estimate
            heap.push(Interval {
                error: 0.0,
                ..worst
            });
            continue;
        }
        push(&mut heap, worst.a, mid, &mut evals);
        push(&mut heap, mid, worst.b, &mut evals);
    }
}

/// 2D tensor Gauss rule (K15 x K15) over a rectangle.
fn gk15_2d<F: Fn(f64, f64) -> f64>(f: &F, sq: &Square) -> (f64, f64) {
    // tensor product of the 1D rule in each coordinate; the error estimate
    // reuses the embedded Gauss rule along both axes
    let cx = 0.5 * (sq.x0 + sq.x1);
    let cy = 0.5 * (sq.y0 + sq.y1);
    let hx = 0.5 * (sq.x1 - sq.x0);
    let hy = 0.5 * (sq.y1 - sq.y0);

    let nodes = |c: f64, h: f64| -> Vec<f64> {
        let mut xs = Vec::with_capacity(15);
        for &node in XGK.iter().take(7) {
            xs.push(c - h * node);
        }
        xs.push(c);
        for &node in XGK.iter().take(7).rev() {
            xs.push(c + h * node);
        }
        xs
    };
    let wk = |i: usize| -> f64 {
        if i == 7 {
            WGK[7]
        } else if i < 7 {
            WGK[i]
        } else {
            WGK[14 - i]
        }
    };
    let wgauss = |i: usize| -> f64 {
        // Gauss nodes are the odd Kronrod indices 1,3,5,(7),9,11,13
        match i {
            1 | 13 => WG[0],
            3 | 11 => WG[1],
            5 | 9 => WG[2],
            7 => WG[3],
            _ => 0.0,
        }
    };

    let xs = nodes(cx, hx);
    let ys = nodes(cy, hy);
    let mut kron = 0.0;
    let mut gauss = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let v = f(x, y);
            kron += wk(i) * wk(j) * v;
            gauss += wgauss(i) * wgauss(j) * v;
        }
    }
    kron *= hx * hy;
    gauss *= hx * hy;
    (kron, (kron - gauss).abs())
}

struct Square {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    /// sum of the four children's rule values (one level finer)
    value: f64,
    /// |value - own rule value|; a two-level estimate that keeps shrinking
    /// near the singular diagonal where the embedded-rule difference stalls
    error: f64,
    child_values: [f64; 4],
}

impl Square {
    fn quadrants(&self) -> [(f64, f64, f64, f64); 4] {
        let mx = 0.5 * (self.x0 + self.x1);
        let my = 0.5 * (self.y0 + self.y1);
        [
            (self.x0, mx, self.y0, my),
            (mx, self.x1, self.y0, my),
            (self.x0, mx, my, self.y1),
            (mx, self.x1, my, self.y1),
        ]
    }
}

impl PartialEq for Square {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Square {}
impl PartialOrd for Square {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Square {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

/// Adaptive 2D integral over [0,1]^2 for kernels singular along x = y.
///
/// The seed partition is aligned with the diagonal so refinement
/// concentrates there; used as the fallback route for the covariance
/// entries.
pub fn integrate_unit_square<F: Fn(f64, f64) -> f64>(f: &F, tol: f64, budget: u64) -> Result<f64> {
    let mut evals: u64 = 0;
    let rule = |x0: f64, x1: f64, y0: f64, y1: f64, evals: &mut u64| -> f64 {
        *evals += 225;
        gk15_2d(
            f,
            &Square {
                x0,
                x1,
                y0,
                y1,
                value: 0.0,
                error: 0.0,
                child_values: [0.0; 4],
            },
        )
        .0
    };
    // `own` is this square's rule value (already known to the caller:
    // either freshly computed for seeds, or cached as a parent's child)
    let push =
        |heap: &mut BinaryHeap<Square>, rect: (f64, f64, f64, f64), own: f64, evals: &mut u64| {
            let mut sq = Square {
                x0: rect.0,
                x1: rect.1,
                y0: rect.2,
                y1: rect.3,
                value: 0.0,
                error: 0.0,
                child_values: [0.0; 4],
            };
            let quadrants = sq.quadrants();
            let mut refined = 0.0;
            for (slot, q) in sq.child_values.iter_mut().zip(quadrants) {
                *slot = rule(q.0, q.1, q.2, q.3, evals);
                refined += *slot;
            }
            sq.value = refined;
            sq.error = (refined - own).abs();
            heap.push(sq);
        };

    let mut heap: BinaryHeap<Square> = BinaryHeap::new();
    // 4x4 seed grid keeps diagonal squares aligned with x = y
    let grid = 4;
    for i in 0..grid {
        for j in 0..grid {
            let g = grid as f64;
            let rect = (
                i as f64 / g,
                (i + 1) as f64 / g,
                j as f64 / g,
                (j + 1) as f64 / g,
            );
            let own = rule(rect.0, rect.1, rect.2, rect.3, &mut evals);
            push(&mut heap, rect, own, &mut evals);
        }
    }

    loop {
        let total: f64 = heap.iter().map(|sq| sq.value).sum();
        let total_err: f64 = heap.iter().map(|sq| sq.error).sum();
        if total_err <= tol * total.abs().max(1e-2) {
            return Ok(total);
        }
        if evals + 16 * 225 > budget {
            return Err(Error::QuadratureNonConvergence { tol, budget });
        }
        let worst = heap.pop().expect("heap nonempty");
        let mx = 0.5 * (worst.x0 + worst.x1);
        let my = 0.5 * (worst.y0 + worst.y1);
        if !(worst.x0 < mx && mx < worst.x1 && worst.y0 < my && my < worst.y1) {
            heap.push(Square {
                error: 0.0,
                ..worst
            });
            continue;
        }
        for (rect, own) in worst.quadrants().into_iter().zip(worst.child_values) {
            push(&mut heap, rect, own, &mut evals);
        }
    }
}
