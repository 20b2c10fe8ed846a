//! Rule-based sentence segmentation.
//!
//! A boundary is placed after `.`, `!` or `?` (plus any closing quotes or
//! brackets) when the next non-whitespace character is an uppercase letter or
//! a digit, optionally behind an opening quote or bracket. A period that ends
//! a known abbreviation never closes a sentence.

use crate::Span;

/// Lowercased tokens (including their final period) that never end a sentence.
const ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "al.", "vs.", "cf.", "viz.", "fig.", "figs.", "eq.", "eqs.", "sec.", "ref.",
    "refs.", "no.", "nos.", "vol.", "pp.", "approx.", "resp.", "dr.", "mr.", "mrs.", "ms.",
    "prof.", "st.", "inc.", "ltd.", "jr.", "sr.",
];

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closing(c: char) -> bool {
    matches!(c, ')' | ']' | '"' | '\'' | '\u{2019}' | '\u{201D}')
}

fn is_opening(c: char) -> bool {
    matches!(c, '(' | '[' | '"' | '\'' | '\u{2018}' | '\u{201C}')
}

fn opens_sentence(c: char) -> bool {
    c.is_uppercase() || c.is_ascii_digit()
}

/// Is the period at byte offset `dot` the end of an abbreviation?
fn ends_abbreviation(text: &str, dot: usize) -> bool {
    let head = &text[..dot];
    let token_start = head
        .char_indices()
        .rev()
        .find(|&(_, c)| !(c.is_alphabetic() || c == '.'))
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    let token = head[token_start..].to_lowercase() + ".";
    ABBREVIATIONS.contains(&token.as_str())
}

/// Splits `text` into ordered, non-overlapping sentence spans that together
/// cover every non-whitespace character. Text without any boundary comes back
/// as a single span; whitespace-only text yields no spans.
pub fn segment_sentences(text: &str) -> Vec<Span> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut i = 0;

    while i < chars.len() {
        let (pos, c) = chars[i];
        if start.is_none() {
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            start = Some(pos);
        }
        if !is_terminal(c) {
            i += 1;
            continue;
        }

        // Extend over runs like "?!" and trailing closers like `."` or `.)`.
        let mut j = i + 1;
        while j < chars.len() && is_terminal(chars[j].1) {
            j += 1;
        }
        while j < chars.len() && is_closing(chars[j].1) {
            j += 1;
        }
        let end = chars.get(j).map_or(text.len(), |&(p, _)| p);

        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        // Text at the very end is flushed below; no whitespace means no break.
        let boundary = if k == chars.len() || k == j {
            false
        } else {
            let next = chars[k].1;
            let next_ok = opens_sentence(next)
                || (is_opening(next) && chars.get(k + 1).is_some_and(|&(_, n)| opens_sentence(n)));
            next_ok && !(c == '.' && j == i + 1 && ends_abbreviation(text, pos))
        };

        if boundary {
            spans.push(Span::new(start.take().unwrap(), end));
            i = k;
        } else {
            i = j;
        }
    }

    if let Some(s) = start {
        let end = text.trim_end().len();
        if end > s {
            spans.push(Span::new(s, end));
        }
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentences(text: &str) -> Vec<&str> {
        segment_sentences(text)
            .iter()
            .map(|s| s.slice(text).unwrap())
            .collect()
    }

    #[test]
    fn splits_single_letter_sentences() {
        assert_eq!(sentences("A. B."), vec!["A.", "B."]);
    }

    #[test]
    fn abbreviation_is_not_a_boundary() {
        assert_eq!(
            sentences("We test e.g. ChatGPT. It works."),
            vec!["We test e.g. ChatGPT.", "It works."]
        );
        assert_eq!(
            sentences("Smith et al. Showed this. Then more."),
            vec!["Smith et al. Showed this.", "Then more."]
        );
        assert_eq!(sentences("GPT vs. Bard. Done."), vec!["GPT vs. Bard.", "Done."]);
    }

    #[test]
    fn lowercase_continuation_is_not_a_boundary() {
        assert_eq!(sentences("It failed. and then ran."), vec!["It failed. and then ran."]);
    }

    #[test]
    fn decimals_and_questions() {
        assert_eq!(
            sentences("Accuracy was 3.5 points higher! Why? 42 runs agree."),
            vec!["Accuracy was 3.5 points higher!", "Why?", "42 runs agree."]
        );
    }

    #[test]
    fn closing_quotes_stay_with_sentence() {
        assert_eq!(
            sentences("They said \"no.\" Then (Again) it ran."),
            vec!["They said \"no.\"", "Then (Again) it ran."]
        );
        assert_eq!(sentences("Done. (See below.)"), vec!["Done.", "(See below.)"]);
    }

    #[test]
    fn no_boundary_falls_back_to_one_span() {
        assert_eq!(sentences("  no terminal punctuation here  "), vec!["no terminal punctuation here"]);
        assert!(segment_sentences("   ").is_empty());
    }

    #[test]
    fn spans_cover_non_whitespace() {
        let text = "  First one.  Second?\n\nThird!  ";
        let spans = segment_sentences(text);
        let covered: String = spans.iter().map(|s| s.slice(text).unwrap()).collect();
        let expected: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        assert_eq!(covered.chars().filter(|c| !c.is_whitespace()).collect::<String>(), expected);
    }
}
