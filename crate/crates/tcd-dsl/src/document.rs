//! Whole files and documents with embedded code blocks.

use crate::ast::Program;
use crate::check::{check_with, Globals};
use crate::diagnostic::{sort, Code, Diagnostic};
use crate::parser::parse_with_end;
use crate::token::{tokenize_lossy, Span, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// The whole file is source.
    Whole,
    /// Only ```` ``` ```` and `\begin{verbatim}` blocks are source.
    Fenced,
}

/// A stretch of source inside a larger file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    /// Byte offset of the first content line.
    pub offset: usize,
    /// 1-based line of the first content line.
    pub line: usize,
    /// Byte length of the content.
    pub len: usize,
}

#[derive(Clone, Debug, Default)]
pub struct CheckedDocument {
    pub programs: Vec<Program>,
    pub blocks: Vec<Block>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Source blocks of `text`, plus an error for a block left open.
pub fn extract_blocks(text: &str, mode: Mode) -> (Vec<Block>, Vec<Diagnostic>) {
    if mode == Mode::Whole {
        let whole = Block {
            offset: 0,
            line: 1,
            len: text.len(),
        };
        return (vec![whole], Vec::new());
    }
    let mut blocks = Vec::new();
    // (fence span, close marker, content start offset, content start line)
    let mut open: Option<(Span, &str, usize, usize)> = None;
    let mut offset = 0;
    for (i, raw) in text.split_inclusive('\n').enumerate() {
        let line_no = i + 1;
        let trimmed = raw.trim();
        let next = offset + raw.len();
        match open {
            None => {
                let close = if trimmed == "```" || trimmed == "```tcd" {
                    Some("```")
                } else if trimmed == "\\begin{verbatim}" {
                    Some("\\end{verbatim}")
                } else {
                    None
                };
                if let Some(close) = close {
                    let indent = raw.len() - raw.trim_start().len();
                    let span = Span {
                        offset: offset + indent,
                        len: trimmed.len(),
                        line: line_no,
                        col: indent + 1,
                    };
                    open = Some((span, close, next, line_no + 1));
                }
            }
            Some((_, close, start, start_line)) if trimmed == close => {
                blocks.push(Block {
                    offset: start,
                    line: start_line,
                    len: offset - start,
                });
                open = None;
            }
            Some(_) => {}
        }
        offset = next;
    }
    let mut diags = Vec::new();
    if let Some((span, close, ..)) = open {
        diags.push(Diagnostic::error(
            Code::UnclosedBlock,
            format!("code block is never closed with '{close}'"),
            span,
        ));
    }
    (blocks, diags)
}

fn shift(span: &mut Span, block: &Block) {
    span.offset += block.offset;
    span.line += block.line - 1;
}

/// Tokens of one block in file coordinates.
fn block_tokens(text: &str, block: &Block) -> (Vec<Token>, Vec<Diagnostic>, Span) {
    let src = &text[block.offset..block.offset + block.len];
    let (mut tokens, mut diags) = tokenize_lossy(src);
    for t in &mut tokens {
        shift(&mut t.span, block);
    }
    for d in &mut diags {
        shift(&mut d.span, block);
    }
    // end of input: just after the last character of the block
    let last_line_start = src.trim_end_matches('\n').rfind('\n').map_or(0, |i| i + 1);
    let body = src.trim_end_matches('\n');
    let mut end = Span {
        offset: body.len(),
        len: 0,
        line: 1 + body.matches('\n').count(),
        col: body.len() - last_line_start + 1,
    };
    shift(&mut end, block);
    (tokens, diags, end)
}

/// Lexes, parses and checks a document. Top-level definitions are shared
/// by all of its blocks. Diagnostics come back in source order.
pub fn check_document(text: &str, mode: Mode) -> CheckedDocument {
    let (blocks, mut diagnostics) = extract_blocks(text, mode);
    let mut programs = Vec::with_capacity(blocks.len());
    for block in &blocks {
        let (tokens, lex, end) = block_tokens(text, block);
        diagnostics.extend(lex);
        let (program, parse) = parse_with_end(&tokens, end);
        diagnostics.extend(parse);
        programs.push(program);
    }
    let mut globals = Globals::default();
    for p in &programs {
        globals.add(p);
    }
    for p in &mut programs {
        diagnostics.extend(check_with(p, &globals));
    }
    sort(&mut diagnostics);
    CheckedDocument {
        programs,
        blocks,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_blocks_found_with_lines() {
        let text =
            "intro\n```\na = 1\n```\nmore\n\\begin{verbatim}\nb = 2\nc = 3\n\\end{verbatim}\n";
        let (blocks, diags) = extract_blocks(text, Mode::Fenced);
        assert!(diags.is_empty());
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].line, 3);
        assert_eq!(
            &text[blocks[0].offset..blocks[0].offset + blocks[0].len],
            "a = 1\n"
        );
        assert_eq!(blocks[1].line, 7);
        assert_eq!(
            &text[blocks[1].offset..blocks[1].offset + blocks[1].len],
            "b = 2\nc = 3\n"
        );
    }

    #[test]
    fn unclosed_fence_reported_at_opening() {
        let (blocks, diags) = extract_blocks("x\n  ```\na = 1\n", Mode::Fenced);
        assert!(blocks.is_empty());
        assert_eq!(diags[0].code, Code::UnclosedBlock);
        assert_eq!((diags[0].span.line, diags[0].span.col), (2, 3));
    }

    #[test]
    fn positions_are_file_positions() {
        let text = "prose\n```\nok = 1\n```\n\n```\n  x = $\n```\n";
        let doc = check_document(text, Mode::Fenced);
        let lex: Vec<_> = doc
            .diagnostics
            .iter()
            .filter(|d| d.code == Code::Lex)
            .collect();
        assert_eq!(lex.len(), 1);
        assert_eq!((lex[0].span.line, lex[0].span.col), (7, 7));
        assert_eq!(&text[lex[0].span.offset..lex[0].span.end()], "$");
    }

    #[test]
    fn end_of_input_error_sits_at_block_end() {
        let text = "```\nf(a[]=1\n```\n";
        let doc = check_document(text, Mode::Fenced);
        let d = &doc.diagnostics[0];
        assert_eq!(d.code, Code::Parse);
        assert_eq!((d.span.line, d.span.col), (2, 8));
        assert!(d.message.contains("end of input"), "{}", d.message);
    }

    #[test]
    fn definitions_visible_across_blocks() {
        let text = "```\nY0[:] = [1, 2]\n```\n```\nz[] = Y0[0]\n```\n";
        let doc = check_document(text, Mode::Fenced);
        assert!(doc.diagnostics.is_empty(), "{:?}", doc.diagnostics);
    }
}
