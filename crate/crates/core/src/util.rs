/// Normalize a free-form name into a snake_case identifier usable as a
/// column name: lowercase, alphanumerics kept, every other run of
/// characters collapsed to a single underscore.
pub(crate) fn snake_case(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut last_underscore = true;
    for ch in name.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
            last_underscore = false;
        } else if !last_underscore {
            out.push('_');
            last_underscore = true;
        }
    }
    while out.ends_with('_') {
        out.pop();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::snake_case;

    #[test]
    fn normalizes_names() {
        assert_eq!(snake_case("Hazard Type"), "hazard_type");
        assert_eq!(snake_case("  recall-reason "), "recall_reason");
        assert_eq!(snake_case("CompSci"), "compsci");
        assert_eq!(snake_case("a!!b"), "a_b");
    }
}
