//! Exponent arithmetic for Schatten-class Strichartz bounds and the
//! classifier of mixed exponents `(d, q, α)`.
//!
//! A query asks whether `‖Σ_j ν_j |e^{itΔ} u_j|²‖_{L^{p'/2}_t L^{q'/2}_x}
//! ≤ C ‖ν‖_{ℓ^{α'}}` can hold, with `2/p + d/q = 1`. Equivalently, whether
//! `W e^{itΔ}` lies in `S^{2α}` for `W ∈ L^p_t L^q_x`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

const TIE: f64 = 1e-12;

fn same(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= TIE * a.abs().max(b.abs()).max(1.0)
}

/// Optimal Schatten exponent `α = (N-1)p / (2N - (N+1)p)` for the restriction
/// operator of a compact curved surface in `R^N`.
pub fn compact_alpha(n: u32, p: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("N", format!("need N ≥ 2, got {n}")));
    }
    let nf = n as f64;
    let endpoint = 2.0 * (nf + 1.0) / (nf + 3.0);
    if p.is_nan() || p < 1.0 || p > endpoint * (1.0 + TIE) {
        return Err(Error::invalid(
            "p",
            format!("{p} outside [1, {endpoint}] = [1, 2(N+1)/(N+3)]"),
        ));
    }
    if same(p, endpoint) {
        return Ok(nf + 1.0);
    }
    Ok((nf - 1.0) * p / (2.0 * nf - (nf + 1.0) * p))
}

/// Hölder conjugate `p' = p/(p-1)`; `∞' = 1`.
pub fn dual_exponent(p: f64) -> Result<f64> {
    if p.is_nan() || p <= 1.0 {
        return Err(Error::invalid("p", format!("need p > 1 for p' = p/(p-1), got {p}")));
    }
    if p.is_infinite() {
        return Ok(1.0);
    }
    Ok(p / (p - 1.0))
}

/// The time exponent `p` with `2/p = 1 - d/q` (`∞` when `q = d`).
pub fn scaling_partner(d: u32, q: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::invalid("d", "need d ≥ 1"));
    }
    let df = d as f64;
    if q.is_nan() || q < df {
        return Err(Error::invalid(
            "q",
            format!("need q ≥ d so that 1 - d/q ≥ 0, got q = {q}, d = {d}"),
        ));
    }
    if q.is_infinite() {
        return Ok(2.0);
    }
    let rhs = 1.0 - df / q;
    if rhs == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 / rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentQuery {
    pub d: u32,
    pub q: f64,
    /// Schatten exponent; `f64::INFINITY` stands for the operator norm.
    pub alpha: f64,
}

impl ExponentQuery {
    pub fn new(d: u32, q: f64, alpha: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("d", "need d ≥ 1"));
        }
        if !(q.is_finite() && q >= 1.0) {
            return Err(Error::invalid("q", format!("need finite q ≥ 1, got {q}")));
        }
        if alpha.is_nan() || alpha < 1.0 {
            return Err(Error::invalid("alpha", format!("need alpha ≥ 1 or inf, got {alpha}")));
        }
        Ok(Self { d, q, alpha })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Valid,
    Fail,
    Open,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Valid => "VALID",
            Verdict::Fail => "FAIL",
            Verdict::Open => "OPEN",
        })
    }
}

/// Why a verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Reason {
    /// `q > d+1`, `α ≥ q`: the Schatten Strichartz line.
    SchattenLine,
    /// `α < q` contradicts the necessary condition `α ≥ q`.
    BelowDiagonal,
    /// `q ≤ d+1`, `α < q/(q-d)`: ruled out by well-separated time translates.
    TimeTranslation,
    /// `d ≤ q ≤ d+1`, `α > q/(q-d)`: interpolation with the Keel–Tao endpoint.
    Interpolation,
    /// `q = d` (or `q = 2` for `d = 1`) with `α = ∞`.
    KeelTaoEndpoint,
    /// `d = 1`, `q = 2`, finite `α ≥ 2`: improvement over `α = ∞` expected but unresolved.
    EndpointUnresolved,
    /// `q` below the endpoint: no Strichartz pair exists.
    BelowEndpoint,
    /// The corner `q = α = d+1`, excluded.
    ExcludedCorner,
    /// `d < q < d+1` on the line `α = q/(q-d)`.
    OpenBoundary,
    /// `d = 2`: the endpoint Strichartz estimate is known to fail, so there is no interpolation leg.
    NoEndpointLeg,
}

impl Reason {
    pub fn describe(self) -> &'static str {
        match self {
            Reason::SchattenLine => "Schatten Strichartz line: q > d+1 and alpha >= q",
            Reason::BelowDiagonal => "necessary condition alpha >= q violated",
            Reason::TimeTranslation => "necessary condition alpha >= q/(q-d) violated (time translates)",
            Reason::Interpolation => "interpolation with the Keel-Tao endpoint: alpha > q/(q-d)",
            Reason::KeelTaoEndpoint => "Keel-Tao endpoint with alpha = inf (operator norm)",
            Reason::EndpointUnresolved => "endpoint, improvement expected but unresolved",
            Reason::BelowEndpoint => "below the endpoint exponent no estimate can hold",
            Reason::ExcludedCorner => "corner q = alpha = d+1: the estimate does not hold",
            Reason::OpenBoundary => "boundary alpha = q/(q-d): unknown (weak Schatten conjectured)",
            Reason::NoEndpointLeg => "endpoint Strichartz estimate is known to fail",
        }
    }

    /// Short machine-readable tag used in CSV output.
    pub fn tag(self) -> &'static str {
        match self {
            Reason::SchattenLine => "schatten-line",
            Reason::BelowDiagonal => "alpha-below-q",
            Reason::TimeTranslation => "time-translation",
            Reason::Interpolation => "interpolation",
            Reason::KeelTaoEndpoint => "keel-tao-endpoint",
            Reason::EndpointUnresolved => "endpoint-unresolved",
            Reason::BelowEndpoint => "below-endpoint",
            Reason::ExcludedCorner => "excluded-corner",
            Reason::OpenBoundary => "open-boundary",
            Reason::NoEndpointLeg => "no-endpoint-leg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegionVerdict {
    pub verdict: Verdict,
    pub reason: Reason,
}

fn verdict(verdict: Verdict, reason: Reason) -> RegionVerdict {
    RegionVerdict { verdict, reason }
}

/// Classifies `(d, q, α)`. Complete for `d ≥ 3`; for `d = 1, 2` see [`Reason`]
/// for the endpoint-specific verdicts.
pub fn classify_mixed(query: &ExponentQuery) -> RegionVerdict {
    use Verdict::*;
    let ExponentQuery { d, q, alpha } = *query;
    let df = d as f64;
    // Lowest admissible q: the Keel–Tao endpoint q = d, or q = 2 when d ≤ 2.
    let q_end = df.max(2.0);
    if q < q_end && !same(q, q_end) {
        return verdict(Fail, Reason::BelowEndpoint);
    }
    if alpha < q && !same(alpha, q) {
        return verdict(Fail, Reason::BelowDiagonal);
    }
    let corner = df + 1.0;
    if q > corner && !same(q, corner) {
        return verdict(Valid, Reason::SchattenLine);
    }
    if same(q, corner) && same(alpha, corner) {
        return verdict(Fail, Reason::ExcludedCorner);
    }
    let at_endpoint = same(q, q_end);
    // Threshold q/(q-d); infinite at q = d.
    let threshold = if same(q, df) { f64::INFINITY } else { q / (q - df) };
    if alpha.is_finite() && alpha < threshold && !same(alpha, threshold) {
        return verdict(Fail, Reason::TimeTranslation);
    }
    match d {
        1 => {
            // q = 2 = d+1 is the endpoint; threshold 2 = q.
            if at_endpoint {
                if alpha.is_infinite() {
                    verdict(Valid, Reason::KeelTaoEndpoint)
                } else {
                    verdict(Open, Reason::EndpointUnresolved)
                }
            } else {
                verdict(Valid, Reason::SchattenLine)
            }
        }
        2 => {
            if at_endpoint {
                verdict(Fail, Reason::NoEndpointLeg)
            } else {
                verdict(Open, Reason::NoEndpointLeg)
            }
        }
        _ => {
            if at_endpoint {
                // Only α = ∞ survives the infinite threshold.
                verdict(Valid, Reason::KeelTaoEndpoint)
            } else if same(alpha, threshold) {
                verdict(Open, Reason::OpenBoundary)
            } else {
                verdict(Valid, Reason::Interpolation)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeKind {
    /// Part of the region, boundary included.
    ValidClosed,
    /// Unknown: the conjectured weak-Schatten line.
    OpenDashed,
    /// The operator-norm axis `1/α = 0`, valid for `q ≥ d`.
    OperatorNormAxis,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryEdge {
    pub from: (f64, f64),
    pub to: (f64, f64),
    pub kind: EdgeKind,
    pub equation: &'static str,
}

/// The known-validity polygon in the `(1/q, 1/α)` plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionBoundary {
    pub d: u32,
    pub vertices: Vec<(f64, f64)>,
    pub edges: Vec<BoundaryEdge>,
    pub excluded_vertices: Vec<(f64, f64)>,
}

/// Polygon `(0,0)–(1/(d+1), 1/(d+1))–(1/d, 0)` with edge annotations.
pub fn region_boundary(d: u32) -> Result<RegionBoundary> {
    if d < 3 {
        return Err(Error::invalid("d", format!("boundary polygon needs d ≥ 3, got {d}")));
    }
    let df = d as f64;
    let a = (0.0, 0.0);
    let b = (1.0 / (df + 1.0), 1.0 / (df + 1.0));
    let c = (1.0 / df, 0.0);
    Ok(RegionBoundary {
        d,
        vertices: vec![a, b, c],
        edges: vec![
            BoundaryEdge {
                from: a,
                to: b,
                kind: EdgeKind::ValidClosed,
                equation: "1/alpha = 1/q",
            },
            BoundaryEdge {
                from: b,
                to: c,
                kind: EdgeKind::OpenDashed,
                equation: "1/alpha = 1 - d/q",
            },
            BoundaryEdge {
                from: c,
                to: a,
                kind: EdgeKind::OperatorNormAxis,
                equation: "1/alpha = 0",
            },
        ],
        excluded_vertices: vec![b],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify(d: u32, q: f64, alpha: f64) -> RegionVerdict {
        classify_mixed(&ExponentQuery::new(d, q, alpha).unwrap())
    }

    #[test]
    fn compact_alpha_examples() {
        for n in 2..=6 {
            assert_eq!(compact_alpha(n, 1.0).unwrap(), 1.0);
        }
        assert!((compact_alpha(2, 1.2).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(compact_alpha(3, 4.0 / 3.0).unwrap(), 4.0);
        assert!(compact_alpha(2, 0.9).is_err());
        assert!(compact_alpha(2, 1.3).is_err());
        assert!(compact_alpha(1, 1.0).is_err());
    }

    #[test]
    fn duality_examples() {
        assert!((dual_exponent(1.2).unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(dual_exponent(f64::INFINITY).unwrap(), 1.0);
        assert!(dual_exponent(1.0).is_err());
        assert_eq!(scaling_partner(2, 4.0).unwrap(), 4.0);
        assert_eq!(scaling_partner(3, 3.0).unwrap(), f64::INFINITY);
        let err = scaling_partner(3, 2.0).unwrap_err();
        assert!(err.to_string().contains("q ≥ d"));
    }

    #[test]
    fn classify_examples() {
        use Verdict::*;
        let inf = f64::INFINITY;
        let cases = [
            (3, 5.0, 5.0, Valid, Reason::SchattenLine),
            (3, 5.0, 4.0, Fail, Reason::BelowDiagonal),
            (3, 3.5, 6.0, Fail, Reason::TimeTranslation),
            (3, 3.5, 8.0, Valid, Reason::Interpolation),
            (3, 3.0, inf, Valid, Reason::KeelTaoEndpoint),
            (3, 4.0, 4.0, Fail, Reason::ExcludedCorner),
            (3, 2.9, inf, Fail, Reason::BelowEndpoint),
        ];
        for (d, q, a, v, r) in cases {
            assert_eq!(classify(d, q, a), RegionVerdict { verdict: v, reason: r }, "{d} {q} {a}");
        }
        assert_eq!(classify(3, 3.5, 7.0).verdict, Open);
        assert_eq!(classify(3, 3.0, 100.0).verdict, Fail);
        assert_eq!(classify(3, 4.0, 4.5).verdict, Valid);
    }

    #[test]
    fn low_dimensions() {
        use Verdict::*;
        let inf = f64::INFINITY;
        assert_eq!(classify(1, 3.0, 3.0).verdict, Valid);
        assert_eq!(classify(1, 3.0, 2.5).verdict, Fail);
        assert_eq!(classify(1, 2.0, inf), verdict(Valid, Reason::KeelTaoEndpoint));
        assert_eq!(classify(1, 2.0, 5.0), verdict(Open, Reason::EndpointUnresolved));
        assert_eq!(classify(1, 2.0, 2.0).verdict, Fail);
        assert_eq!(classify(1, 1.5, inf).verdict, Fail);
        assert_eq!(classify(2, 4.0, 4.0).verdict, Valid);
        assert_eq!(classify(2, 2.5, 6.0), verdict(Open, Reason::NoEndpointLeg));
        assert_eq!(classify(2, 2.5, 4.0).verdict, Fail);
        assert_eq!(classify(2, 2.0, inf).verdict, Fail);
    }

    #[test]
    fn malformed_queries_rejected() {
        assert!(ExponentQuery::new(0, 3.0, 3.0).is_err());
        assert!(ExponentQuery::new(3, -1.0, 3.0).is_err());
        assert!(ExponentQuery::new(3, 3.0, f64::NAN).is_err());
        assert!(ExponentQuery::new(3, f64::INFINITY, 3.0).is_err());
    }

    #[test]
    fn boundary_examples() {
        let b = region_boundary(3).unwrap();
        assert_eq!(b.vertices, vec![(0.0, 0.0), (0.25, 0.25), (1.0 / 3.0, 0.0)]);
        let dashed = b.edges.iter().find(|e| e.kind == EdgeKind::OpenDashed).unwrap();
        for (x, y) in [dashed.from, dashed.to] {
            assert!((y - (1.0 - 3.0 * x)).abs() < 1e-15);
        }
        assert_eq!(b.excluded_vertices, vec![(0.25, 0.25)]);
        assert!(region_boundary(2).is_err());
    }
}
