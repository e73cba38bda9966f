/// Lowercases, splits on runs of non-alphanumeric characters, and drops
/// short tokens (fewer than three characters). De-identification
/// placeholders like `_____` contain no alphanumerics and vanish with the
/// separators.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 3)
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_and_lowercases() {
        assert_eq!(
            tokenize("Right pleural effusion."),
            vec!["right", "pleural", "effusion"]
        );
    }

    #[test]
    fn drops_placeholders_and_short_tokens() {
        assert_eq!(tokenize("comparison to _____."), vec!["comparison"]);
    }

    #[test]
    fn empty_text_gives_no_tokens() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("__ -- !!").is_empty());
    }

    #[test]
    fn numbers_and_hyphens() {
        assert_eq!(
            tokenize("T12-L1 level, 2021 study"),
            vec!["t12", "level", "2021", "study"]
        );
    }
}
