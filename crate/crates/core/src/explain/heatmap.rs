//! Red/blue span heatmaps. Red spans push the score toward the target label,
//! blue spans away from it; colour strength is `|phi| / max |phi|`.

use super::{Attribution, ExplainError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapFormat {
    /// 24-bit ANSI background colours for terminals.
    Ansi,
    /// Standalone HTML fragment with inline styles.
    Html,
}

impl std::str::FromStr for HeatmapFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ansi" => Ok(Self::Ansi),
            "html" => Ok(Self::Html),
            other => Err(format!("unknown heatmap format {other:?} (expected ansi or html)")),
        }
    }
}

fn channel(intensity: f64) -> u8 {
    (255.0 * (1.0 - intensity)).round().clamp(0.0, 255.0) as u8
}

fn escape_html(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
}

pub fn render_heatmap(
    attribution: &Attribution,
    text: &str,
    format: HeatmapFormat,
) -> Result<String, ExplainError> {
    attribution.check_alignment(text)?;
    let max = attribution
        .spans
        .iter()
        .map(|s| s.phi.abs())
        .fold(0.0f64, f64::max);

    let mut out = String::with_capacity(text.len() * 2);
    if format == HeatmapFormat::Html {
        out.push_str("<div class=\"heatmap\" data-target=\"");
        escape_html(&attribution.target_label, &mut out);
        out.push_str("\" style=\"white-space:pre-wrap;font-family:sans-serif;line-height:1.6\">");
    }
    let mut cursor = 0;
    for sv in &attribution.spans {
        let gap = &text[cursor..sv.span.start];
        let body = &text[sv.span.start..sv.span.end];
        cursor = sv.span.end;
        match format {
            HeatmapFormat::Ansi => out.push_str(gap),
            HeatmapFormat::Html => escape_html(gap, &mut out),
        }
        if sv.phi == 0.0 || max == 0.0 {
            match format {
                HeatmapFormat::Ansi => out.push_str(body),
                HeatmapFormat::Html => escape_html(body, &mut out),
            }
            continue;
        }
        let t = sv.phi.abs() / max;
        let positive = sv.phi > 0.0;
        match format {
            HeatmapFormat::Ansi => {
                let (r, g, b) = if positive {
                    (255, channel(t), channel(t))
                } else {
                    (channel(t), channel(t), 255)
                };
                out.push_str(&format!("\x1b[38;2;0;0;0;48;2;{r};{g};{b}m{body}\x1b[0m"));
            }
            HeatmapFormat::Html => {
                let rgb = if positive { "255,0,0" } else { "0,0,255" };
                out.push_str(&format!(
                    "<span style=\"background-color:rgba({rgb},{t:.3})\" title=\"{:+.6}\">",
                    sv.phi
                ));
                escape_html(body, &mut out);
                out.push_str("</span>");
            }
        }
    }
    let tail = &text[cursor..];
    match format {
        HeatmapFormat::Ansi => out.push_str(tail),
        HeatmapFormat::Html => {
            escape_html(tail, &mut out);
            out.push_str("</div>");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::{Estimator, SpanValue};
    use crate::Span;

    fn attribution(text: &str, phis: &[f64]) -> Attribution {
        let spans = crate::explain::word_spans(text);
        Attribution {
            doc_id: "d".into(),
            target_label: "3 stars".into(),
            model_id: "m".into(),
            estimator: Estimator::Exact,
            seed: None,
            sample_count: 0,
            base_value: 0.0,
            full_value: phis.iter().sum(),
            spans: spans
                .into_iter()
                .zip(phis)
                .map(|(span, &phi)| SpanValue { span, phi, stderr: 0.0 })
                .collect(),
        }
    }

    #[test]
    fn all_zero_is_unstyled() {
        let text = "plain <text> here";
        let a = attribution(text, &[0.0, 0.0, 0.0]);
        assert_eq!(render_heatmap(&a, text, HeatmapFormat::Ansi).unwrap(), text);
        let html = render_heatmap(&a, text, HeatmapFormat::Html).unwrap();
        assert!(!html.contains("<span"));
        assert!(html.contains("plain &lt;text&gt; here"));
    }

    #[test]
    fn single_positive_span_full_red() {
        let text = "not this word";
        let a = attribution(text, &[0.0, 0.4, 0.0]);
        let ansi = render_heatmap(&a, text, HeatmapFormat::Ansi).unwrap();
        assert_eq!(ansi, "not \x1b[38;2;0;0;0;48;2;255;0;0mthis\x1b[0m word");
        let html = render_heatmap(&a, text, HeatmapFormat::Html).unwrap();
        assert_eq!(html.matches("<span").count(), 1);
        assert!(html.contains("rgba(255,0,0,1.000)"));
    }

    #[test]
    fn negative_is_blue_and_scaled() {
        let text = "a b";
        let a = attribution(text, &[0.5, -0.25]);
        let ansi = render_heatmap(&a, text, HeatmapFormat::Ansi).unwrap();
        assert!(ansi.contains("48;2;255;0;0ma"));
        assert!(ansi.contains("48;2;128;128;255mb"));
    }

    #[test]
    fn misaligned_rejected() {
        let text = "a b";
        let mut a = attribution(text, &[0.5, -0.25]);
        a.spans[1].span = Span::new(2, 9);
        assert!(matches!(
            render_heatmap(&a, text, HeatmapFormat::Html),
            Err(ExplainError::Misaligned(_))
        ));
    }
}
