use std::cmp::Ordering;

use crate::algebra::{
    integer_coordinates, module_membership, parse_qvalues, split_algebra_header, Algebra, ModuleWitness, QMatrix,
    QValue,
};

use super::{bigint_to_i64, Piece, RegionError, RegionSet};

/// A single parallelepiped whose edges lie in `Zα + Z^d`, with the witnesses.
#[derive(Clone, Debug)]
pub struct BrsParallelepiped {
    pub region: RegionSet,
    /// `witnesses[i]` reproduces edge column `i` as `n·α + m`.
    pub witnesses: Vec<ModuleWitness>,
}

impl BrsParallelepiped {
    /// Re-checks every edge against its witness.
    pub fn check(&self, alpha: &[QValue]) -> bool {
        let Some(piece) = self.region.pieces().first() else {
            return false;
        };
        self.witnesses.len() == piece.dim()
            && self.witnesses.iter().enumerate().all(|(i, w)| w.evaluate(alpha) == piece.edges().column(i))
    }
}

fn check_alpha(alpha: &[QValue]) -> Result<&Algebra, RegionError> {
    let first = alpha.first().ok_or_else(|| RegionError::Dimension("empty alpha".into()))?;
    Ok(first.algebra())
}

/// Parallelepiped at the origin spanned by `vᵢ = nᵢα + mᵢ`.
pub fn brs_parallelepiped(alpha: &[QValue], generators: &[(i64, Vec<i64>)]) -> Result<BrsParallelepiped, RegionError> {
    let alg = check_alpha(alpha)?;
    let d = alpha.len();
    if generators.len() != d || generators.iter().any(|(_, m)| m.len() != d) {
        return Err(RegionError::Dimension(format!("need {d} generators with {d} integer entries")));
    }
    let witnesses: Vec<ModuleWitness> =
        generators.iter().map(|(n, m)| ModuleWitness { n: *n, m: m.clone() }).collect();
    let cols: Vec<Vec<QValue>> = witnesses.iter().map(|w| w.evaluate(alpha)).collect();
    let edges = QMatrix::from_columns(alg, &cols)?;
    let piece = Piece::new(vec![QValue::zero(alg); d], edges)?;
    Ok(BrsParallelepiped { region: RegionSet::new(alg, d, vec![piece])?, witnesses })
}

/// Candidate parameter values in search order `0, 1, −1, 2, −2, ..`.
fn search_values(bound: i64) -> Vec<i64> {
    let mut v = vec![0];
    for k in 1..=bound {
        v.push(k);
        v.push(-k);
    }
    v
}

/// All `(n, m)` with entries bounded by `bound`, ordered by total size and
/// then lexicographically in the `0, 1, −1, ..` value order.
pub(crate) fn candidate_witnesses(d: usize, bound: i64) -> Vec<ModuleWitness> {
    let values = search_values(bound);
    let rank = |x: i64| values.iter().position(|&v| v == x).unwrap_or(usize::MAX);
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..=d {
        out = out
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out.retain(|p| p.iter().any(|&x| x != 0));
    out.sort_by_key(|p| (p.iter().map(|x| x.abs()).sum::<i64>(), p.iter().map(|&x| rank(x)).collect::<Vec<_>>()));
    out.into_iter().map(|p| ModuleWitness { n: p[0], m: p[1..].to_vec() }).collect()
}

/// A BRS parallelepiped of volume exactly `gamma`, found by bounded search.
///
/// `gamma` must have the form `n0 + n1·α1 + .. + nd·αd`. In one dimension the
/// answer is the interval `[0, γ)`. Otherwise sets of `d` edges with
/// coefficients bounded by `search_bound` are tried in a fixed order; columns
/// are ordered so that the edge determinant is positive.
pub fn realize_measure(alpha: &[QValue], gamma: &QValue, search_bound: i64) -> Result<BrsParallelepiped, RegionError> {
    let alg = check_alpha(alpha)?;
    let d = alpha.len();
    if gamma.signum()? != Ordering::Greater {
        return Err(RegionError::Precondition(format!("measure {gamma} is not positive")));
    }
    let coords = integer_coordinates(gamma, alpha).ok_or_else(|| {
        RegionError::Precondition(format!("{gamma} is not of the form n0 + n1*alpha1 + ... + nd*alphad"))
    })?;
    if d == 1 {
        let w = ModuleWitness { n: bigint_to_i64(&coords[1])?, m: vec![bigint_to_i64(&coords[0])?] };
        return brs_parallelepiped(alpha, &[(w.n, w.m)]);
    }

    let cands = candidate_witnesses(d, search_bound);
    let vecs: Vec<Vec<QValue>> = cands.iter().map(|w| w.evaluate(alpha)).collect();
    let nums: Vec<Vec<f64>> = vecs.iter().map(|v| v.iter().map(QValue::to_f64).collect()).collect();
    let target = gamma.to_f64();
    let tol = 1e-7 * (1.0 + target);
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let m = nalgebra::DMatrix::from_fn(d, d, |r, c| nums[idx[c]][r]);
        if (m.determinant().abs() - target).abs() < tol {
            let cols: Vec<Vec<QValue>> = idx.iter().map(|&i| vecs[i].clone()).collect();
            let edges = QMatrix::from_columns(alg, &cols)?;
            let det = edges.det()?;
            let neg = -&det;
            if det == *gamma || neg == *gamma {
                let mut order = idx.clone();
                if det != *gamma {
                    order.swap(0, 1);
                }
                let gens: Vec<(i64, Vec<i64>)> = order.iter().map(|&i| (cands[i].n, cands[i].m.clone())).collect();
                return brs_parallelepiped(alpha, &gens);
            }
        }
        if !next_combination(&mut idx, cands.len()) {
            break;
        }
    }
    Err(RegionError::SearchExhausted(format!(
        "no parallelepiped of volume {gamma} with coefficients bounded by {search_bound}"
    )))
}

/// Advances `idx` to the next increasing index tuple below `n`.
pub(crate) fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Source pieces, translations in `Zα + Z^d` and target pieces.
#[derive(Clone, Debug)]
pub struct EquidecompCertificate {
    pub alpha: Vec<QValue>,
    pub source: RegionSet,
    pub target: RegionSet,
    pub shifts: Vec<Vec<QValue>>,
    /// Optional recorded witnesses; missing ones are recomputed on verification.
    pub witnesses: Vec<Option<ModuleWitness>>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct EquidecompVerdict {
    pub valid: bool,
    pub violation: Option<String>,
    pub witnesses: Vec<Option<ModuleWitness>>,
}

impl EquidecompCertificate {
    pub fn new(alpha: Vec<QValue>, source: RegionSet, target: RegionSet, shifts: Vec<Vec<QValue>>) -> Self {
        let witnesses = vec![None; shifts.len()];
        EquidecompCertificate { alpha, source, target, shifts, witnesses }
    }

    /// Serializes with the region files referenced by path.
    pub fn to_text(&self, source_path: &str, target_path: &str) -> String {
        let mut out = self.alpha.first().map(|a| a.algebra().to_text()).unwrap_or_default();
        let alpha: Vec<String> = self.alpha.iter().map(ToString::to_string).collect();
        out.push_str(&format!("alpha {}\nsource {source_path}\ntarget {target_path}\n", alpha.join(", ")));
        for s in &self.shifts {
            let s: Vec<String> = s.iter().map(ToString::to_string).collect();
            out.push_str(&format!("shift {}\n", s.join(", ")));
        }
        out
    }

    /// Parses `alpha`, `source`, `target` and `shift` lines; `load` resolves
    /// the region paths.
    pub fn parse(
        text: &str,
        default: &Algebra,
        mut load: impl FnMut(&str, &Algebra) -> Result<RegionSet, RegionError>,
    ) -> Result<Self, RegionError> {
        let (header, lines) = split_algebra_header(text);
        let alg = crate::algebra::algebra_or_default(&header, default)?;
        let (mut alpha, mut source, mut target, mut shifts) = (None, None, None, Vec::new());
        for (line, body) in lines {
            let err = |msg: String| RegionError::Parse { line, msg };
            let (key, rest) = body.split_once(char::is_whitespace).ok_or_else(|| err("missing value".into()))?;
            let rest = rest.trim();
            match key {
                "alpha" => alpha = Some(parse_qvalues(&alg, rest).map_err(|e| err(e.to_string()))?),
                "source" => source = Some(load(rest, &alg)?),
                "target" => target = Some(load(rest, &alg)?),
                "shift" => shifts.push(parse_qvalues(&alg, rest).map_err(|e| err(e.to_string()))?),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        let missing = |what: &str| RegionError::Parse { line: 0, msg: format!("certificate has no `{what}` line") };
        Ok(Self::new(
            alpha.ok_or_else(|| missing("alpha"))?,
            source.ok_or_else(|| missing("source"))?,
            target.ok_or_else(|| missing("target"))?,
            shifts,
        ))
    }
}

fn show(v: &[QValue]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

/// Checks every certificate invariant exactly and reports the first failure.
pub fn verify_equidecomposition(cert: &EquidecompCertificate) -> EquidecompVerdict {
    let mut witnesses = Vec::new();
    let fail = |msg: String, witnesses: Vec<Option<ModuleWitness>>| EquidecompVerdict {
        valid: false,
        violation: Some(msg),
        witnesses,
    };
    let (src, tgt) = (cert.source.pieces(), cert.target.pieces());
    if src.len() != tgt.len() || src.len() != cert.shifts.len() {
        return fail(
            format!("piece counts differ: {} source, {} target, {} shifts", src.len(), tgt.len(), cert.shifts.len()),
            witnesses,
        );
    }
    for (i, shift) in cert.shifts.iter().enumerate() {
        let recorded = cert.witnesses.get(i).cloned().flatten();
        let w = match recorded {
            Some(w) if w.evaluate(&cert.alpha) == *shift => Some(w),
            Some(_) => return fail(format!("recorded witness for shift {i} does not reproduce {}", show(shift)), witnesses),
            None => module_membership(shift, &cert.alpha),
        };
        if w.is_none() {
            witnesses.push(None);
            return fail(format!("shift {i} {} is not in Z*alpha + Z^d", show(shift)), witnesses);
        }
        witnesses.push(w);
    }
    for (i, (p, shift)) in src.iter().zip(&cert.shifts).enumerate() {
        match p.translated(shift) {
            Ok(moved) if moved.same_set(&tgt[i]) => {}
            Ok(_) => return fail(format!("source piece {i} shifted by {} is not target piece {i}", show(shift)), witnesses),
            Err(e) => return fail(format!("piece {i}: {e}"), witnesses),
        }
    }
    for (name, region) in [("source", &cert.source), ("target", &cert.target)] {
        match region.first_overlap() {
            Ok(None) => {}
            Ok(Some((i, j))) => return fail(format!("{name} pieces {i} and {j} overlap"), witnesses),
            Err(e) => return fail(format!("{name}: {e}"), witnesses),
        }
    }
    match (cert.source.volume(), cert.target.volume()) {
        (Ok(a), Ok(b)) if a == b => {}
        _ => return fail("source and target volumes differ".into(), witnesses),
    }
    EquidecompVerdict { valid: true, violation: None, witnesses }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraSpec;

    fn q(alg: &Algebra, s: &str) -> QValue {
        QValue::parse(alg, s).unwrap()
    }

    #[test]
    fn hecke_interval() {
        let alg = AlgebraSpec::quadratic(2).unwrap();
        let a = vec![q(&alg, "w1")];
        let p = brs_parallelepiped(&a, &[(1, vec![-1])]).unwrap();
        assert_eq!(p.region.volume().unwrap(), q(&alg, "w1 - 1"));
        assert!(p.region.contains_exact(&[q(&alg, "0")]).unwrap());
        assert!(p.check(&a));
    }

    #[test]
    fn two_dimensional_parallelepipeds() {
        let alg = AlgebraSpec::biquadratic(2, 3).unwrap();
        let a = vec![q(&alg, "w1"), q(&alg, "w2")];
        let p = brs_parallelepiped(&a, &[(1, vec![0, 0]), (0, vec![0, 1])]).unwrap();
        assert_eq!(p.region.volume().unwrap(), q(&alg, "w1"));
        let cube = brs_parallelepiped(&a, &[(0, vec![1, 0]), (0, vec![0, 1])]).unwrap();
        assert_eq!(cube.region.volume().unwrap(), QValue::one(&alg));
        assert!(matches!(
            brs_parallelepiped(&a, &[(1, vec![0, 0]), (2, vec![0, 0])]),
            Err(RegionError::Degenerate)
        ));
    }

    #[test]
    fn realize_measure_examples() {
        let alg = AlgebraSpec::quadratic(2).unwrap();
        let a = vec![q(&alg, "w1")];
        let p = realize_measure(&a, &q(&alg, "2 - w1"), 3).unwrap();
        assert_eq!(p.region.pieces()[0].edges().get(0, 0), &q(&alg, "2 - w1"));
        assert!(realize_measure(&a, &q(&alg, "1/2"), 3).is_err());

        let bq = AlgebraSpec::biquadratic(2, 3).unwrap();
        let a = vec![q(&bq, "w1"), q(&bq, "w2")];
        let p = realize_measure(&a, &q(&bq, "w1"), 2).unwrap();
        let e = p.region.pieces()[0].edges();
        assert_eq!(e.column(0), a);
        assert_eq!(e.column(1), vec![q(&bq, "0"), q(&bq, "1")]);
        assert!(p.check(&a));
        let cube = realize_measure(&a, &QValue::one(&bq), 2).unwrap();
        assert_eq!(cube.region.pieces()[0].edges(), &QMatrix::identity(&bq, 2));
        // w3 = sqrt 6 is not admissible
        assert!(matches!(realize_measure(&a, &q(&bq, "w3"), 2), Err(RegionError::Precondition(_))));
    }

    fn hecke_certificate(shift: &str) -> EquidecompCertificate {
        let alg = AlgebraSpec::quadratic(2).unwrap();
        let iv = |a: &str, b: &str| RegionSet::interval(&q(&alg, a), &q(&alg, b)).unwrap();
        let source = RegionSet::union(&[iv("0", "w1 - 1"), iv("1", "3 - w1")]).unwrap();
        let target = RegionSet::union(&[iv("0", "w1 - 1"), iv("w1 - 1", "1")]).unwrap();
        EquidecompCertificate::new(vec![q(&alg, "w1")], source, target, vec![vec![q(&alg, "0")], vec![q(&alg, shift)]])
    }

    #[test]
    fn certificate_examples() {
        let v = verify_equidecomposition(&hecke_certificate("w1 - 2"));
        assert!(v.valid, "{:?}", v.violation);
        assert_eq!(v.witnesses[1], Some(ModuleWitness { n: 1, m: vec![-2] }));

        let bad = verify_equidecomposition(&hecke_certificate("1/2"));
        assert!(!bad.valid);
        assert!(bad.violation.unwrap().contains("1/2"));
    }

    #[test]
    fn identity_certificate() {
        let c = hecke_certificate("w1 - 2");
        let id = EquidecompCertificate::new(
            c.alpha.clone(),
            c.source.clone(),
            c.source.clone(),
            vec![vec![QValue::zero(c.source.algebra())]; 2],
        );
        assert!(verify_equidecomposition(&id).valid);
    }

    #[test]
    fn certificate_text_round_trip() {
        let c = hecke_certificate("w1 - 2");
        let text = c.to_text("a.region", "b.region");
        let parsed = EquidecompCertificate::parse(&text, &AlgebraSpec::rationals(), |path, _| {
            Ok(if path == "a.region" { c.source.clone() } else { c.target.clone() })
        })
        .unwrap();
        assert_eq!(parsed.shifts, c.shifts);
        assert!(verify_equidecomposition(&parsed).valid);
    }

    #[test]
    fn combinations_in_order() {
        let mut idx = vec![0, 1];
        let mut seen = vec![idx.clone()];
        while next_combination(&mut idx, 4) {
            seen.push(idx.clone());
        }
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }
}
