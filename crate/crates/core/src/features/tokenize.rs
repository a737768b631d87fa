/// Lowercases, splits on Unicode whitespace and strips punctuation from
/// both ends of each token. Tokens that end up empty are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let trimmed = raw.trim_matches(is_punctuation);
            (!trimmed.is_empty()).then(|| trimmed.to_lowercase())
        })
        .collect()
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{00A1}'
                | '\u{00A7}'
                | '\u{00AB}'
                | '\u{00B6}'
                | '\u{00B7}'
                | '\u{00BB}'
                | '\u{00BF}'
                | '\u{2010}'..='\u{2027}'
                | '\u{2030}'..='\u{205E}'
                | '\u{3001}'..='\u{3003}'
                | '\u{3008}'..='\u{3011}'
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_edges_and_lowercases() {
        assert_eq!(tokenize("The cat. The cat!"), vec!["the", "cat", "the", "cat"]);
    }

    #[test]
    fn empty_and_whitespace() {
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("A  B"), vec!["a", "b"]);
        assert_eq!(tokenize("\t x\u{3000}y \n"), vec!["x", "y"]);
    }

    #[test]
    fn inner_punctuation_survives() {
        assert_eq!(tokenize("\u{201C}Don't\u{201D} stop\u{2026} -- ok"), vec!["don't", "stop", "ok"]);
    }
}
