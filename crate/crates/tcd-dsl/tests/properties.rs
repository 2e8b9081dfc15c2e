use proptest::prelude::*;
use tcd_dsl::{check_document, tokenize_lossy, Code, Mode};

/// Text built only from lexable fragments, separated by blanks and comments.
fn lexable_text() -> impl Strategy<Value = String> {
    let fragment = prop::sample::select(vec![
        "x", "y0", "_t", "12", "3.5", "1e-7", "^", "->", "=>", "=", ":=", "[", "]", "(", ")", "{",
        "}", ":", ",", ";", "@", "&es", "+", "-", "*", "/", "d y",
    ]);
    // always a gap: `:=` glued to `=>` lexes as `:=` then a stray `>`
    let gap = prop::sample::select(vec![" ", "  ", "\n", "\t", " # note\n", "#c\n"]);
    prop::collection::vec((fragment, gap), 0..40)
        .prop_map(|parts| parts.into_iter().flat_map(|(f, g)| [f, g]).collect())
}

fn source_text() -> impl Strategy<Value = String> {
    proptest::string::string_regex(r"[a-z0-9_^:=>\-\[\](){},;@&+*/. \n#$d]{0,120}").unwrap()
}

proptest! {
    #[test]
    fn checking_never_panics_and_spans_stay_in_bounds(text in source_text()) {
        for mode in [Mode::Whole, Mode::Fenced] {
            let doc = check_document(&text, mode);
            for d in &doc.diagnostics {
                prop_assert!(d.span.end() <= text.len());
                prop_assert!(d.span.line >= 1 && d.span.col >= 1);
            }
        }
    }

    #[test]
    fn tokens_and_lex_errors_cover_all_non_blank_text(text in source_text()) {
        let (tokens, diags) = tokenize_lossy(&text);
        let mut covered = vec![false; text.len()];
        let mut last_end = 0;
        for t in &tokens {
            prop_assert!(t.span.offset >= last_end);
            prop_assert_eq!(&text[t.span.offset..t.span.end()], t.text.as_str());
            last_end = t.span.end();
            covered[t.span.offset..t.span.end()].iter_mut().for_each(|c| *c = true);
        }
        for d in &diags {
            prop_assert_eq!(d.code, Code::Lex);
            covered[d.span.offset..d.span.end()].iter_mut().for_each(|c| *c = true);
        }
        let mut in_comment = false;
        for (i, b) in text.bytes().enumerate() {
            match b {
                b'#' if !covered[i] => in_comment = true,
                b'\n' => in_comment = false,
                _ => {}
            }
            if !in_comment && !b.is_ascii_whitespace() {
                prop_assert!(covered[i], "byte {} ({:?}) not covered", i, b as char);
            }
        }
    }

    #[test]
    fn token_texts_with_original_gaps_rebuild_input_minus_comments(text in lexable_text()) {
        let (tokens, diags) = tokenize_lossy(&text);
        prop_assert!(diags.is_empty(), "{:?}", diags);
        let mut rebuilt = String::new();
        let mut last = 0;
        for t in &tokens {
            rebuilt.push_str(&strip_comments(&text[last..t.span.offset]));
            rebuilt.push_str(&t.text);
            last = t.span.end();
        }
        rebuilt.push_str(&strip_comments(&text[last..]));
        prop_assert_eq!(rebuilt, strip_comments(&text));
    }

    #[test]
    fn checking_is_deterministic(text in source_text()) {
        let a = check_document(&text, Mode::Whole);
        let b = check_document(&text, Mode::Whole);
        prop_assert_eq!(a.diagnostics, b.diagnostics);
    }

    #[test]
    fn float_literals_lex_as_one_number(x in proptest::num::f64::NORMAL) {
        let text = format!("{:e}", x.abs());
        let (tokens, diags) = tokenize_lossy(&text);
        prop_assert!(diags.is_empty());
        prop_assert_eq!(tokens.len(), 1);
        prop_assert_eq!(tokens[0].text.parse::<f64>().unwrap(), x.abs());
    }
}

/// Drops `#` up to (not including) the line break.
fn strip_comments(s: &str) -> String {
    s.split_inclusive('\n')
        .map(|line| match line.find('#') {
            Some(i) => format!(
                "{}{}",
                &line[..i],
                if line.ends_with('\n') { "\n" } else { "" }
            ),
            None => line.to_string(),
        })
        .collect()
}
