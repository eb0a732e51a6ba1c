use crate::algebra::{algebra_or_default, parse_qvalues, split_algebra_header, Algebra, QMatrix};

use super::{Piece, RegionError, RegionSet};

pub(super) fn region_to_text(s: &RegionSet) -> String {
    let mut out = s.algebra().to_text();
    out.push_str(&format!("# dim {}\n", s.dim()));
    for p in s.pieces() {
        let offset: Vec<String> = p.offset().iter().map(ToString::to_string).collect();
        let rows: Vec<String> = (0..p.dim())
            .map(|r| p.edges().row(r).iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
            .collect();
        out.push_str(&format!("piece offset={} edges={}\n", offset.join(", "), rows.join("; ")));
    }
    out
}

pub(super) fn parse_region(text: &str, default: &Algebra) -> Result<RegionSet, RegionError> {
    let (header, lines) = split_algebra_header(text);
    let alg = algebra_or_default(&header, default)?;
    let mut pieces = Vec::new();
    for (line, body) in lines {
        let err = |msg: &str| RegionError::Parse { line, msg: msg.into() };
        let rest = body.strip_prefix("piece").ok_or_else(|| err("expected `piece`"))?.trim();
        let rest = rest.strip_prefix("offset=").ok_or_else(|| err("expected `offset=`"))?;
        let (offset, edges) = rest.split_once("edges=").ok_or_else(|| err("expected `edges=`"))?;
        let offset = parse_qvalues(&alg, offset.trim()).map_err(|e| err(&e.to_string()))?;
        let rows = edges
            .split(';')
            .map(|r| parse_qvalues(&alg, r.trim()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| err(&e.to_string()))?;
        let edges = QMatrix::from_rows(&alg, rows).map_err(|e| err(&e.to_string()))?;
        pieces.push(Piece::new(offset, edges).map_err(|e| err(&e.to_string()))?);
    }
    let dim = pieces.first().map(Piece::dim).ok_or(RegionError::Parse { line: 0, msg: "no pieces".into() })?;
    RegionSet::new(&alg, dim, pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraSpec, QValue};

    #[test]
    fn round_trip() {
        let alg = AlgebraSpec::quadratic(2).unwrap();
        let text = "basis w1 = sqrt 2\npiece offset=0 edges=w1 - 1\npiece offset=1 edges=2 - w1\n";
        let s = RegionSet::parse(text, &AlgebraSpec::rationals()).unwrap();
        assert_eq!(s.volume().unwrap(), QValue::one(&alg));
        let again = RegionSet::parse(&s.to_text(), &alg).unwrap();
        assert_eq!(again.pieces().len(), 2);
        assert!(again.pieces()[1].same_set(&s.pieces()[1]));
    }

    #[test]
    fn two_dimensional_rows() {
        let alg = AlgebraSpec::biquadratic(2, 3).unwrap();
        let s = RegionSet::parse("piece offset=0, 0 edges=w1, 0; w2, 1", &alg).unwrap();
        assert_eq!(s.volume().unwrap(), QValue::basis(&alg, 1));
    }

    #[test]
    fn bad_line_reports_number() {
        let alg = AlgebraSpec::rationals();
        match RegionSet::parse("piece offset=0 edges=1\nblock", &alg) {
            Err(RegionError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
