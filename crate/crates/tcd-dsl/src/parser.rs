//! Recursive-descent parser. Newlines only matter in two places: a call or
//! index postfix must open on the line where its operand ends, and a
//! statement must end at a line break.

use crate::ast::*;
use crate::diagnostic::{Code, Diagnostic};
use crate::token::{Span, Token, TokenKind};

/// Deeper nesting than this is reported instead of recursed into.
const MAX_DEPTH: usize = 200;

/// Parses a token stream. Statements that fail to parse are reported and
/// skipped; the rest of the program is still returned.
pub fn parse(tokens: &[Token]) -> (Program, Vec<Diagnostic>) {
    let end = tokens.last().map_or(Span::default(), |t| Span {
        offset: t.span.end(),
        len: 0,
        col: t.span.col + t.span.len,
        ..t.span
    });
    parse_with_end(tokens, end)
}

/// As [`parse`], with the position used for errors at end of input.
pub fn parse_with_end(tokens: &[Token], end: Span) -> (Program, Vec<Diagnostic>) {
    let mut p = Parser {
        tokens,
        pos: 0,
        end,
        depth: 0,
        next_lambda: 0,
        diags: Vec::new(),
    };
    let mut program = Program::default();
    while p.pos < tokens.len() {
        let start = p.pos;
        match p.statement() {
            Ok(s) => program.statements.push(s),
            Err(Failed) => p.recover(start),
        }
    }
    (program, p.diags)
}

/// A parse error has been recorded.
#[derive(Debug)]
struct Failed;

type PResult<T> = Result<T, Failed>;

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    end: Span,
    depth: usize,
    next_lambda: usize,
    diags: Vec<Diagnostic>,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<TokenKind> {
        self.peek().map(|t| t.kind)
    }

    fn peek_kind_at(&self, ahead: usize) -> Option<TokenKind> {
        self.tokens.get(self.pos + ahead).map(|t| t.kind)
    }

    fn at(&self, kind: TokenKind) -> bool {
        self.peek_kind() == Some(kind)
    }

    fn bump(&mut self) -> &'t Token {
        let t = &self.tokens[self.pos];
        self.pos += 1;
        t
    }

    fn eat(&mut self, kind: TokenKind) -> Option<&'t Token> {
        self.at(kind).then(|| self.bump())
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos - 1].span
    }

    fn here(&self) -> Span {
        self.peek().map_or(self.end, |t| t.span)
    }

    /// Span from token `start` through the last consumed token.
    fn span_from(&self, start: usize) -> Span {
        self.tokens[start].span.to(self.prev_span())
    }

    fn fail<T>(&mut self, expected: &str) -> PResult<T> {
        let (found, span) = match self.peek() {
            Some(t) => (format!("'{}'", t.text), t.span),
            None => ("end of input".to_string(), self.end),
        };
        self.diags.push(Diagnostic::error(
            Code::Parse,
            format!("expected {expected}, found {found}"),
            span,
        ));
        Err(Failed)
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<&'t Token> {
        match self.eat(kind) {
            Some(t) => Ok(t),
            None => self.fail(kind.describe()),
        }
    }

    fn name(&mut self) -> PResult<Ident> {
        let t = self.expect(TokenKind::Name)?;
        Ok(Ident {
            name: t.text.clone(),
            span: t.span,
        })
    }

    /// Whether the next token opens on the line where the previous one ends.
    fn same_line(&self) -> bool {
        match (self.pos.checked_sub(1), self.peek()) {
            (Some(prev), Some(t)) => self.tokens[prev].span.line == t.span.line,
            _ => false,
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            self.depth = 0;
            let span = self.here();
            self.diags
                .push(Diagnostic::error(Code::Parse, "nesting too deep", span));
            return Err(Failed);
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth = self.depth.saturating_sub(1);
    }

    /// Skips the rest of a failed statement: everything up to the next token
    /// that starts a line at or left of the statement's own column.
    fn recover(&mut self, start: usize) {
        self.depth = 0;
        let col = self.tokens[start].span.col;
        if self.pos == start {
            self.pos += 1;
        }
        while let Some(t) = self.peek() {
            let starts_line = self.tokens[self.pos - 1].span.line < t.span.line;
            if starts_line && t.span.col <= col {
                break;
            }
            self.pos += 1;
        }
    }

    fn statement(&mut self) -> PResult<Statement> {
        let start = self.pos;
        let kind = if self.at(TokenKind::Name)
            && self.peek_kind_at(1) == Some(TokenKind::Colon)
            && self.peek_kind_at(2) == Some(TokenKind::Lambda)
        {
            self.signature()?
        } else {
            self.binding_or_expr()?
        };
        if self.peek().is_some() && self.same_line() {
            return self.fail("end of statement");
        }
        Ok(Statement {
            kind,
            span: self.span_from(start),
        })
    }

    fn signature(&mut self) -> PResult<StatementKind> {
        let name = self.name()?;
        self.expect(TokenKind::Colon)?;
        self.expect(TokenKind::Lambda)?;
        self.expect(TokenKind::LParen)?;
        let params = self.params()?;
        self.expect(TokenKind::FatArrow)?;
        self.expect(TokenKind::LBracket)?;
        let result = self.index_items()?;
        Ok(StatementKind::Signature {
            name,
            params,
            result,
        })
    }

    fn binding_or_expr(&mut self) -> PResult<StatementKind> {
        let first = self.expr()?;
        let (source, target) = if self.eat(TokenKind::Arrow).is_some() {
            let target = self.expr()?;
            if target.as_declaration().is_none() {
                self.diags.push(Diagnostic::error(
                    Code::Parse,
                    "expected a name as the target of '->'",
                    target.span,
                ));
                return Err(Failed);
            }
            if !matches!(
                self.peek_kind(),
                Some(TokenKind::Assign | TokenKind::Define)
            ) {
                return self.fail("'=' or ':='");
            }
            (Some(first), target)
        } else {
            (None, first)
        };

        let op = match self.peek_kind() {
            Some(TokenKind::Assign) => AssignOp::Assign,
            Some(TokenKind::Define) => AssignOp::Define,
            _ => {
                return Ok(StatementKind::Expr {
                    expr: target,
                    annotations: Vec::new(),
                })
            }
        };
        self.bump();
        let value = self.expr()?;
        let mut annotations = Vec::new();
        while self.eat(TokenKind::Assign).is_some() {
            annotations.push(self.expr()?);
        }
        if target.as_declaration().is_some() {
            Ok(StatementKind::Binding {
                target,
                source,
                op,
                value,
                annotations,
            })
        } else if op == AssignOp::Define {
            self.diags.push(Diagnostic::error(
                Code::Parse,
                "expected a name before ':='",
                target.span,
            ));
            Err(Failed)
        } else {
            annotations.insert(0, value);
            Ok(StatementKind::Expr {
                expr: target,
                annotations,
            })
        }
    }

    fn expr(&mut self) -> PResult<Node> {
        self.enter()?;
        let r = self.additive();
        self.leave();
        r
    }

    fn additive(&mut self) -> PResult<Node> {
        let start = self.pos;
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Plus) => BinOp::Add,
                Some(TokenKind::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.multiplicative()?;
            lhs = Node {
                kind: NodeKind::BinOp {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span: self.span_from(start),
            };
        }
    }

    fn multiplicative(&mut self) -> PResult<Node> {
        let start = self.pos;
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Star) => BinOp::Mul,
                Some(TokenKind::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node {
                kind: NodeKind::BinOp {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span: self.span_from(start),
            };
        }
    }

    fn unary(&mut self) -> PResult<Node> {
        let start = self.pos;
        if self.eat(TokenKind::Minus).is_some() {
            self.enter()?;
            let inner = self.unary();
            self.leave();
            return Ok(Node {
                kind: NodeKind::Neg(Box::new(inner?)),
                span: self.span_from(start),
            });
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Node> {
        let start = self.pos;
        let mut node = self.primary()?;
        loop {
            if !self.same_line() {
                return Ok(node);
            }
            if self.eat(TokenKind::LParen).is_some() {
                let args = self.keyword_args()?;
                node = Node {
                    kind: NodeKind::Apply {
                        callee: Box::new(node),
                        args,
                    },
                    span: self.span_from(start),
                };
            } else if self.eat(TokenKind::LBracket).is_some() {
                let items = self.index_items()?;
                node = Node {
                    kind: NodeKind::Index {
                        base: Box::new(node),
                        items,
                    },
                    span: self.span_from(start),
                };
            } else {
                return Ok(node);
            }
        }
    }

    fn primary(&mut self) -> PResult<Node> {
        let start = self.pos;
        let Some(tok) = self.peek() else {
            return self.fail("an expression");
        };
        let kind = match tok.kind {
            TokenKind::Number => {
                self.bump();
                match tok.text.parse::<f64>() {
                    Ok(v) => NodeKind::Number(v),
                    Err(_) => {
                        self.diags.push(Diagnostic::error(
                            Code::Parse,
                            format!("malformed number '{}'", tok.text),
                            tok.span,
                        ));
                        return Err(Failed);
                    }
                }
            }
            TokenKind::Name => {
                self.bump();
                NodeKind::NameRef {
                    name: tok.text.clone(),
                    resolution: None,
                }
            }
            TokenKind::AmpName => return self.builtin(),
            TokenKind::Lambda => return self.lambda(),
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                // parentheses only group; keep the outer span for messages
                return Ok(Node {
                    span: self.span_from(start),
                    ..inner
                });
            }
            TokenKind::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if self.eat(TokenKind::RBracket).is_none() {
                    loop {
                        items.push(self.expr()?);
                        if self.eat(TokenKind::Comma).is_none() {
                            break;
                        }
                    }
                    if self.eat(TokenKind::RBracket).is_none() {
                        return self.fail("',' or ']'");
                    }
                }
                NodeKind::List(items)
            }
            _ => return self.fail("an expression"),
        };
        Ok(Node {
            kind,
            span: self.span_from(start),
        })
    }

    fn lambda(&mut self) -> PResult<Node> {
        let start = self.pos;
        self.expect(TokenKind::Lambda)?;
        self.expect(TokenKind::LParen)?;
        let id = self.next_lambda;
        self.next_lambda += 1;
        let params = self.params()?;
        self.expect(TokenKind::Arrow)?;
        let body = self.expr()?;
        Ok(Node {
            kind: NodeKind::Lambda {
                id,
                params,
                body: Box::new(body),
            },
            span: self.span_from(start),
        })
    }

    /// Parameters after the opening parenthesis, through the closing one.
    fn params(&mut self) -> PResult<Vec<Param>> {
        let mut params = Vec::new();
        if self.eat(TokenKind::RParen).is_some() {
            return Ok(params);
        }
        loop {
            let start = self.pos;
            let name = self.name()?;
            let spec = self.slot_spec()?;
            let value = match self.eat(TokenKind::Assign) {
                Some(_) => Some(self.expr()?),
                None => None,
            };
            params.push(Param {
                name,
                spec,
                value,
                span: self.span_from(start),
            });
            match self.peek_kind() {
                Some(TokenKind::Comma) => {
                    self.bump();
                }
                Some(TokenKind::RParen) => {
                    self.bump();
                    return Ok(params);
                }
                _ => return self.fail("',' or ')'"),
            }
        }
    }

    /// `[items]`, `{}` or nothing after a slot name.
    fn slot_spec(&mut self) -> PResult<SlotSpec> {
        if self.eat(TokenKind::LBracket).is_some() {
            return Ok(SlotSpec::Indexed(self.index_items()?));
        }
        if self.eat(TokenKind::LBrace).is_some() {
            self.expect(TokenKind::RBrace)?;
            return Ok(SlotSpec::Function);
        }
        Ok(SlotSpec::Bare)
    }

    fn keyword_args(&mut self) -> PResult<Vec<KeywordArg>> {
        let mut args = Vec::new();
        if self.eat(TokenKind::RParen).is_some() {
            return Ok(args);
        }
        loop {
            if !self.at(TokenKind::Name) {
                return self.fail("a keyword argument such as 'x[:]=...'");
            }
            let name = self.name()?;
            let spec = self.slot_spec()?;
            self.expect(TokenKind::Assign)?;
            let value = self.expr()?;
            args.push(KeywordArg { name, spec, value });
            match self.peek_kind() {
                Some(TokenKind::Comma) => {
                    self.bump();
                }
                Some(TokenKind::RParen) => {
                    self.bump();
                    return Ok(args);
                }
                _ => return self.fail("',' or ')'"),
            }
        }
    }

    /// Index items after the opening bracket, through the closing one.
    fn index_items(&mut self) -> PResult<Vec<IndexItem>> {
        let mut items = Vec::new();
        if self.eat(TokenKind::RBracket).is_some() {
            return Ok(items);
        }
        loop {
            items.push(self.index_item()?);
            match self.peek_kind() {
                Some(TokenKind::Comma) => {
                    self.bump();
                }
                Some(TokenKind::RBracket) => {
                    self.bump();
                    return Ok(items);
                }
                _ => return self.fail("',' or ']'"),
            }
        }
    }

    fn index_item(&mut self) -> PResult<IndexItem> {
        let start = self.pos;
        let kind = match self.peek_kind() {
            Some(TokenKind::Broadcast) => {
                self.bump();
                IndexKind::Broadcast
            }
            Some(TokenKind::Deriv) => {
                self.bump();
                let name = self.name()?;
                self.expect(TokenKind::LBracket)?;
                self.enter()?;
                let items = self.index_items();
                self.leave();
                IndexKind::Derivative {
                    name,
                    items: items?,
                }
            }
            Some(TokenKind::Colon) => {
                self.bump();
                if self.slice_bound_follows() {
                    IndexKind::Slice {
                        start: None,
                        end: Some(Box::new(self.expr()?)),
                    }
                } else {
                    IndexKind::FullSlice
                }
            }
            _ => {
                let e = self.expr()?;
                if self.eat(TokenKind::Colon).is_some() {
                    let end = if self.slice_bound_follows() {
                        Some(Box::new(self.expr()?))
                    } else {
                        None
                    };
                    IndexKind::Slice {
                        start: Some(Box::new(e)),
                        end,
                    }
                } else {
                    IndexKind::Expr(Box::new(e))
                }
            }
        };
        Ok(IndexItem {
            kind,
            span: self.span_from(start),
        })
    }

    fn slice_bound_follows(&self) -> bool {
        !matches!(
            self.peek_kind(),
            Some(TokenKind::Comma | TokenKind::RBracket) | None
        )
    }

    fn builtin(&mut self) -> PResult<Node> {
        let start = self.pos;
        let tok = self.expect(TokenKind::AmpName)?;
        let name = tok.text[1..].to_string();
        if !self.same_line() || !self.at(TokenKind::LParen) {
            return self.fail("'(' after a builtin name");
        }
        self.bump();
        let kind = if name == "es" {
            self.einsum_body()?
        } else {
            let mut args = Vec::new();
            if self.eat(TokenKind::RParen).is_none() {
                loop {
                    args.push(self.expr()?);
                    match self.peek_kind() {
                        Some(TokenKind::Comma) => {
                            self.bump();
                        }
                        Some(TokenKind::RParen) => {
                            self.bump();
                            break;
                        }
                        _ => return self.fail("',' or ')'"),
                    }
                }
            }
            NodeKind::Builtin { name, args }
        };
        Ok(Node {
            kind,
            span: self.span_from(start),
        })
    }

    /// `x @ a, b; y @ b -> a)` after `&es(`.
    fn einsum_body(&mut self) -> PResult<NodeKind> {
        let mut operands = Vec::new();
        loop {
            let start = self.pos;
            let expr = self.expr()?;
            let mut indices = Vec::new();
            if self.eat(TokenKind::At).is_some() {
                loop {
                    indices.push(self.name()?);
                    if self.eat(TokenKind::Comma).is_none() {
                        break;
                    }
                }
            }
            operands.push(EsOperand {
                expr,
                indices,
                span: self.span_from(start),
            });
            match self.peek_kind() {
                Some(TokenKind::Semi) => {
                    self.bump();
                }
                Some(TokenKind::Arrow) => {
                    self.bump();
                    break;
                }
                _ => return self.fail("'@', ';' or '->'"),
            }
        }
        let mut output = Vec::new();
        if self.eat(TokenKind::RParen).is_none() {
            loop {
                output.push(self.name()?);
                match self.peek_kind() {
                    Some(TokenKind::Comma) => {
                        self.bump();
                    }
                    Some(TokenKind::RParen) => {
                        self.bump();
                        break;
                    }
                    _ => return self.fail("',' or ')'"),
                }
            }
        }
        Ok(NodeKind::EinSum { operands, output })
    }
}
