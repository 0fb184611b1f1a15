use super::{parse, Presentation, PresentationError};

pub const BUILTIN_NAMES: [&str; 6] = ["qpois", "qpois_dual", "qlp", "qlp_dual", "lieb", "frob"];

fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "qpois" => include_str!("../../catalog/qpois.json"),
        "qpois_dual" => include_str!("../../catalog/qpois_dual.json"),
        "qlp" => include_str!("../../catalog/qlp.json"),
        "qlp_dual" => include_str!("../../catalog/qlp_dual.json"),
        "lieb" => include_str!("../../catalog/lieb.json"),
        "frob" => include_str!("../../catalog/frob.json"),
        _ => return None,
    })
}

/// One of the catalog presentations.
pub fn builtin(name: &str) -> Result<Presentation, PresentationError> {
    let src = source(name).ok_or_else(|| PresentationError::UnknownBuiltin(name.to_string()))?;
    parse(src)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_parse() {
        for n in BUILTIN_NAMES {
            let p = builtin(n).unwrap();
            assert_eq!(p.name, n);
        }
        assert_eq!(builtin("nope"), Err(PresentationError::UnknownBuiltin("nope".into())));
    }

    #[test]
    fn transcription_term_counts() {
        let q = builtin("qpois").unwrap();
        assert_eq!(q.generators.len(), 1);
        let g = &q.generators[0];
        assert_eq!((g.inputs, g.outputs, g.dim), (2, 2, 1));
        assert_eq!(g.in_transpositions[0][0][0], crate::exact_linalg::int(1));
        assert_eq!(g.out_transpositions[0][0][0], crate::exact_linalg::int(-1));
        assert_eq!(q.relations.len(), 1);
        assert_eq!(q.relations[0].terms.len(), 9);
        let l = builtin("qlp").unwrap();
        let counts: Vec<usize> = l.relations.iter().map(|r| r.terms.len()).collect();
        assert_eq!(counts, vec![3, 9, 18]);
        let f = builtin("frob").unwrap();
        assert_eq!(f.relations.len(), 4);
    }
}
