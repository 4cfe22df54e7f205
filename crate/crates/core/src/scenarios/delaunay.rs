//! Bowyer-Watson Delaunay triangulation.

/// Relative tolerance of the in-circumcircle test; cocircular points count as
/// outside.
const EPS: f64 = 1e-9;

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Whether `p` lies strictly inside the circumcircle of the counter-clockwise
/// triangle `a b c`.
fn in_circle(a: [f64; 2], b: [f64; 2], c: [f64; 2], p: [f64; 2]) -> bool {
    let rows = [a, b, c].map(|q| {
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        [dx, dy, dx * dx + dy * dy]
    });
    let det = rows[0][0] * (rows[1][1] * rows[2][2] - rows[1][2] * rows[2][1])
        - rows[0][1] * (rows[1][0] * rows[2][2] - rows[1][2] * rows[2][0])
        + rows[0][2] * (rows[1][0] * rows[2][1] - rows[1][1] * rows[2][0]);
    let scale = rows
        .iter()
        .map(|r| r[2])
        .fold(0.0f64, f64::max)
        .powi(2)
        .max(f64::MIN_POSITIVE);
    det > EPS * scale
}

/// Convex hull boundary in counter-clockwise order, collinear boundary points
/// included.
fn hull(points: &[[f64; 2]], order: &[usize]) -> Vec<usize> {
    let mut lower: Vec<usize> = Vec::new();
    for &i in order {
        while lower.len() >= 2
            && orient(points[lower[lower.len() - 2]], points[lower[lower.len() - 1]], points[i]) < 0.0
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in order.iter().rev() {
        while upper.len() >= 2
            && orient(points[upper[upper.len() - 2]], points[upper[upper.len() - 1]], points[i]) < 0.0
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Undirected Delaunay edges `(i, j)` with `i < j`, sorted. Points are
/// inserted in lexicographic order; all-collinear inputs yield the path along
/// the line.
pub fn delaunay_edges(points: &[[f64; 2]]) -> Vec<(usize, usize)> {
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
    });
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut add = |a: usize, b: usize| {
        if a != b {
            edges.push((a.min(b), a.max(b)));
        }
    };
    let collinear = n < 3 || {
        let (first, last) = (points[order[0]], points[order[n - 1]]);
        points.iter().all(|&p| orient(first, last, p) == 0.0)
    };
    if collinear {
        for w in order.windows(2) {
            add(w[0], w[1]);
        }
    } else {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1.0);
        let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        let mut all = points.to_vec();
        all.push([mid[0] - 64.0 * span, mid[1] - 32.0 * span]);
        all.push([mid[0] + 64.0 * span, mid[1] - 32.0 * span]);
        all.push([mid[0], mid[1] + 64.0 * span]);
        let mut triangles: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];
        for &p in &order {
            let (bad, good): (Vec<[usize; 3]>, Vec<[usize; 3]>) = triangles
                .into_iter()
                .partition(|t| in_circle(all[t[0]], all[t[1]], all[t[2]], all[p]));
            triangles = good;
            let mut boundary: Vec<(usize, usize)> = Vec::new();
            for t in &bad {
                for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                    let shared = bad.iter().any(|u| {
                        u != t && u.contains(&a) && u.contains(&b)
                    });
                    if !shared {
                        boundary.push((a, b));
                    }
                }
            }
            for (a, b) in boundary {
                let mut t = [a, b, p];
                if orient(all[t[0]], all[t[1]], all[t[2]]) < 0.0 {
                    t.swap(0, 1);
                }
                triangles.push(t);
            }
        }
        for t in &triangles {
            if t.iter().all(|&v| v < n) {
                add(t[0], t[1]);
                add(t[1], t[2]);
                add(t[2], t[0]);
            }
        }
        // a finite super-triangle can hide hull edges
        let h = hull(points, &order);
        for k in 0..h.len() {
            add(h[k], h[(k + 1) % h.len()]);
        }
    }
    edges.sort_unstable();
    edges.dedup();
    edges
}
