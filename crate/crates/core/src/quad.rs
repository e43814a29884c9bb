//! Adaptive Gauss-Kronrod (G7, K15) quadrature on finite intervals.

use crate::error::{Error, Result};

/// Quadrature controls.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Panel-split budget; exhausting it signals a divergent or
    /// pathologically singular integrand.
    pub max_panels: usize,
    /// Magnitude guard: integrals beyond this are treated as divergent.
    pub magnitude_guard: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_panels: 20_000,
            magnitude_guard: 1e100,
        }
    }
}

// Kronrod-15 abscissae (non-negative half) and weights; Gauss-7 weights
// attach to every second abscissa.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One K15 panel: returns (kronrod value, |kronrod - gauss| error estimate).
fn panel(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kron = WGK[7] * f(mid);
    let mut gauss = WG[3] * f(mid);
    for i in 0..7 {
        let dx = half * XGK[i];
        let fsum = f(mid - dx) + f(mid + dx);
        kron += WGK[i] * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    kron *= half;
    gauss *= half;
    (kron, (kron - gauss).abs())
}

/// Adaptively integrates `f` over `[a, b]`, pre-splitting at `seeds`
/// (interior break points such as kinks of the integrand).
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    seeds: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(b > a) {
        return Err(Error::Quadrature(format!("empty interval [{a}, {b}]")));
    }
    let mut cuts: Vec<f64> = vec![a];
    let mut inner: Vec<f64> = seeds.iter().copied().filter(|&s| s > a && s < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.extend(inner);
    cuts.push(b);

    // (error, a, b, value), worst panel kept on top by linear scan.
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        let (v, e) = panel(&mut f, w[0], w[1]);
        panels.push((e, w[0], w[1], v));
    }

    for _ in 0..cfg.max_panels {
        let total: f64 = panels.iter().map(|p| p.3).sum();
        let err: f64 = panels.iter().map(|p| p.0).sum();
        if !total.is_finite() || total.abs() > cfg.magnitude_guard {
            return Err(Error::Quadrature(format!(
                "integral magnitude guard tripped (value {total})"
            )));
        }
        if err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            return Ok(total);
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.partial_cmp(&y.1 .0).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (_, pa, pb, _) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            return Err(Error::Quadrature(
                "panel underflow before reaching tolerance (singular integrand?)".into(),
            ));
        }
        let (v1, e1) = panel(&mut f, pa, mid);
        let (v2, e2) = panel(&mut f, mid, pb);
        panels.push((e1, pa, mid, v1));
        panels.push((e2, mid, pb, v2));
    }
    Err(Error::Quadrature(format!(
        "did not converge within {} panel splits",
        cfg.max_panels
    )))
}
