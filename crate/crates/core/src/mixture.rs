//! Best constrained mixture over a finite deviation grid.
//!
//! Each pure deviation is summarized by its expected payment `p`, its ROI
//! excess `a = p - tau v` and its gain `g = v - sigma p`. A mixture is feasible
//! when its average `a` is at most 0 and its average `p` at most the budget.
//! Without a budget the optimum is the upper concave hull of the `(a, g)`
//! cloud evaluated on `a <= 0`; a budget is priced out with a multiplier
//! `beta` (the dual is convex in `beta`). When the agent is additive the cloud
//! is a Minkowski sum of per-auction clouds, whose hull is the slope-sorted
//! merge of the per-auction hull edges.

/// Summary of one pure deviation (in one auction or jointly).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub a: f64,
    pub g: f64,
    pub p: f64,
}

/// A mixture as (choice per factor, weight) pairs.
pub type Mixture = Vec<(Vec<usize>, f64)>;

#[derive(Debug, Clone)]
pub struct Best {
    pub value: f64,
    pub witness: Mixture,
}

/// Upper concave hull of `(a, g)`; vertex indices by increasing `a`.
pub fn upper_hull(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&x, &y| pts[x].0.total_cmp(&pts[y].0).then(pts[y].1.total_cmp(&pts[x].1)));
    // drop points sharing an abscissa with a better one
    idx.dedup_by(|b, a| pts[*a].0 == pts[*b].0);
    let mut hull: Vec<usize> = Vec::with_capacity(idx.len());
    for k in idx {
        while hull.len() >= 2 {
            let (o, q) = (pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]]);
            let r = pts[k];
            let cross = (q.0 - o.0) * (r.1 - o.1) - (q.1 - o.1) * (r.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    hull
}

/// Maximum of `sum_f g` over mixtures of the product of `factors` with
/// average `sum_f a <= 0`, where `g` is already net of any budget price.
/// Returns `None` when no mixture is feasible.
pub fn best_below_zero(factors: &[Vec<(f64, f64)>]) -> Option<Best> {
    let hulls: Vec<Vec<usize>> = factors.iter().map(|f| upper_hull(f)).collect();
    let mut choice: Vec<usize> = hulls.iter().map(|h| h[0]).collect();
    let mut pos = (
        factors.iter().zip(&choice).map(|(f, &c)| f[c].0).sum::<f64>(),
        factors.iter().zip(&choice).map(|(f, &c)| f[c].1).sum::<f64>(),
    );
    if pos.0 > 0.0 {
        return None;
    }
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for (f, h) in hulls.iter().enumerate() {
        for k in 1..h.len() {
            let (p, q) = (factors[f][h[k - 1]], factors[f][h[k]]);
            edges.push(((q.1 - p.1) / (q.0 - p.0), f, k));
        }
    }
    edges.sort_by(|x, y| y.0.total_cmp(&x.0));
    for (slope, f, k) in edges {
        if slope <= 0.0 {
            break;
        }
        let (p, q) = (factors[f][hulls[f][k - 1]], factors[f][hulls[f][k]]);
        let next = (pos.0 + q.0 - p.0, pos.1 + q.1 - p.1);
        if next.0 <= 0.0 {
            choice[f] = hulls[f][k];
            pos = next;
            continue;
        }
        // the chain crosses a = 0 on this edge
        let w = -pos.0 / (next.0 - pos.0);
        let mut other = choice.clone();
        other[f] = hulls[f][k];
        let value = pos.1 + w * (next.1 - pos.1);
        let mut witness = vec![(choice, 1.0 - w)];
        if w > 0.0 {
            witness.push((other, w));
        }
        return Some(Best { value, witness });
    }
    Some(Best { value: pos.1, witness: vec![(choice, 1.0)] })
}

/// Average `(a, g, p)` of a mixture.
pub fn mixture_totals(factors: &[Vec<Point>], mix: &Mixture) -> Point {
    let mut t = Point { a: 0.0, g: 0.0, p: 0.0 };
    for (choice, w) in mix {
        for (f, &c) in choice.iter().enumerate() {
            let q = factors[f][c];
            t.a += w * q.a;
            t.g += w * q.g;
            t.p += w * q.p;
        }
    }
    t
}

fn priced(factors: &[Vec<Point>], beta: f64) -> Vec<Vec<(f64, f64)>> {
    factors.iter().map(|f| f.iter().map(|q| (q.a, q.g - beta * q.p)).collect()).collect()
}

/// Result of the constrained search: an upper bound on the best feasible
/// mixture and a candidate mixture that is feasible up to rounding.
#[derive(Debug, Clone)]
pub struct Constrained {
    pub upper: f64,
    pub witness: Option<(Mixture, Point)>,
}

/// Best mixture with average `a <= 0` and average `p <= budget`.
pub fn best_constrained(factors: &[Vec<Point>], budget: f64) -> Constrained {
    let base = best_below_zero(&priced(factors, 0.0));
    let Some(base) = base else {
        return Constrained { upper: f64::NEG_INFINITY, witness: None };
    };
    let t0 = mixture_totals(factors, &base.witness);
    if budget.is_infinite() || t0.p <= budget {
        return Constrained { upper: base.value, witness: Some((base.witness, t0)) };
    }
    // psi(beta) = beta B + max_{a <= 0} (g - beta p) is convex and bounds the optimum.
    let psi = |beta: f64| -> f64 {
        match best_below_zero(&priced(factors, beta)) {
            Some(b) => beta * budget + b.value,
            None => f64::INFINITY,
        }
    };
    let gmax = factors.iter().map(|f| f.iter().map(|q| q.g.abs()).fold(0.0, f64::max)).sum::<f64>();
    let (mut lo, mut hi) = (0.0f64, gmax / budget.max(1e-300) + 1.0);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (psi(x1), psi(x2));
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = psi(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = psi(x2);
        }
        if hi - lo <= 1e-13 * (1.0 + hi) {
            break;
        }
    }
    let beta = 0.5 * (lo + hi);
    let upper = psi(beta).min(psi(0.0)).min(f1).min(f2);

    // primal candidates on both sides of the optimal price, mixed to meet the budget
    let h = 1e-7 * (1.0 + beta);
    let mut cands: Vec<(Mixture, Point)> = Vec::new();
    for b in [(beta - h).max(0.0), beta, beta + h] {
        if let Some(best) = best_below_zero(&priced(factors, b)) {
            let t = mixture_totals(factors, &best.witness);
            cands.push((best.witness, t));
        }
    }
    let mut witness: Option<(Mixture, Point)> = None;
    let mut consider = |mix: Mixture, t: Point| {
        if t.p <= budget * (1.0 + 1e-12) && witness.as_ref().is_none_or(|(_, w)| t.g > w.g) {
            witness = Some((mix, t));
        }
    };
    for (mix, t) in &cands {
        consider(mix.clone(), *t);
    }
    for (m1, t1) in &cands {
        for (m2, t2) in &cands {
            if t1.p > budget && t2.p < budget {
                let w = (t1.p - budget) / (t1.p - t2.p);
                let mut mix: Mixture = m1.iter().map(|(c, x)| (c.clone(), x * (1.0 - w))).collect();
                mix.extend(m2.iter().map(|(c, x)| (c.clone(), x * w)));
                let t = Point { a: (1.0 - w) * t1.a + w * t2.a, g: (1.0 - w) * t1.g + w * t2.g, p: budget };
                consider(mix, t);
            }
        }
    }
    Constrained { upper, witness }
}
