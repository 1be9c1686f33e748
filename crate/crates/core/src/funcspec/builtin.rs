use super::FuncExpr;

/// Names accepted by [`builtin`]; `d` is a positive dimension.
pub const BUILTIN_CATALOG: [&str; 5] = [
    "euclid_norm(d)",
    "sum_squares(d)",
    "exmupper_f",
    "identity_1d",
    "double_well",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown builtin `{name}`; catalog: {}", BUILTIN_CATALOG.join(", "))]
pub struct UnknownBuiltin {
    pub name: String,
}

/// Looks up a fixture function by name.
///
/// `exmupper_f` is `1` on `x <= 0` and `x^2` on `x > 0`; together with
/// `identity_1d` as the constraint it is the standard discontinuous example.
/// `double_well` is `x^4 - x^2`.
pub fn builtin(name: &str) -> Result<FuncExpr, UnknownBuiltin> {
    let unknown = || UnknownBuiltin {
        name: name.to_string(),
    };
    let name = name.trim();
    let (head, dim) = match name.split_once('(') {
        Some((head, rest)) => {
            let d: usize = rest
                .strip_suffix(')')
                .and_then(|d| d.trim().parse().ok())
                .filter(|&d| d > 0)
                .ok_or_else(unknown)?;
            (head.trim(), Some(d))
        }
        None => (name, None),
    };
    let (text, d) = match (head, dim) {
        ("euclid_norm", Some(d)) => {
            let args: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
            (format!("norm({})", args.join(", ")), d)
        }
        ("sum_squares", Some(d)) => {
            let terms: Vec<String> = (1..=d).map(|i| format!("x{i}^2")).collect();
            (terms.join(" + "), d)
        }
        ("exmupper_f", None) => ("piecewise { x1 <= 0 : 1 ; else : x1^2 }".to_string(), 1),
        ("identity_1d", None) => ("x1".to_string(), 1),
        ("double_well", None) => ("x1^4 - x1^2".to_string(), 1),
        _ => return Err(unknown()),
    };
    Ok(FuncExpr::parse(&text, d).expect("catalog entries parse"))
}
