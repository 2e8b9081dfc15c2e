//! Name resolution and static checks over a parsed program.
//!
//! Lookup order for a name: earlier parameters of the list whose bound
//! value is being read (latest first), then each enclosing lambda's
//! parameters from the innermost outward (latest first), then global.

use std::collections::{HashMap, HashSet};

use crate::ast::*;
use crate::diagnostic::{Code, Diagnostic};

/// Facts about top-level names, shared by all blocks of one document.
#[derive(Clone, Debug, Default)]
pub struct Globals {
    defined: HashSet<String>,
    /// `None` when definitions disagree or declare no index list.
    declared: HashMap<String, Option<usize>>,
    /// Result index counts from `name: ^(...) => [...]`.
    signatures: HashMap<String, usize>,
}

impl Globals {
    pub fn collect(program: &Program) -> Self {
        let mut g = Self::default();
        g.add(program);
        g
    }

    pub fn add(&mut self, program: &Program) {
        for s in &program.statements {
            if let StatementKind::Signature { name, result, .. } = &s.kind {
                self.signatures.insert(name.name.clone(), result.len());
            }
            let Some((name, items)) = s.kind.defines() else {
                continue;
            };
            self.defined.insert(name.name.clone());
            if matches!(s.kind, StatementKind::Signature { .. }) {
                continue;
            }
            // `x[j] = ...` sets an entry; only all-slice targets declare
            let count = items
                .filter(|items| items.iter().all(|i| i.kind == IndexKind::FullSlice))
                .map(|items| items.len());
            self.declared
                .entry(name.name.clone())
                .and_modify(|c| {
                    if *c != count {
                        *c = None;
                    }
                })
                .or_insert(count);
        }
    }

    pub fn is_defined(&self, name: &str) -> bool {
        self.defined.contains(name)
    }
}

/// Rewrites `^() -> x` to `x` everywhere.
pub fn normalize(program: &mut Program) {
    for s in &mut program.statements {
        match &mut s.kind {
            StatementKind::Signature { params, .. } => params.iter_mut().for_each(normalize_param),
            StatementKind::Binding {
                target,
                source,
                value,
                annotations,
                ..
            } => {
                normalize_node(target);
                if let Some(src) = source {
                    normalize_node(src);
                }
                normalize_node(value);
                annotations.iter_mut().for_each(normalize_node);
            }
            StatementKind::Expr { expr, annotations } => {
                normalize_node(expr);
                annotations.iter_mut().for_each(normalize_node);
            }
        }
    }
}

fn normalize_param(p: &mut Param) {
    normalize_items_in_spec(&mut p.spec);
    if let Some(v) = &mut p.value {
        normalize_node(v);
    }
}

fn normalize_items_in_spec(spec: &mut SlotSpec) {
    if let SlotSpec::Indexed(items) = spec {
        items.iter_mut().for_each(normalize_item);
    }
}

fn normalize_item(item: &mut IndexItem) {
    match &mut item.kind {
        IndexKind::Slice { start, end } => {
            start
                .iter_mut()
                .chain(end.iter_mut())
                .for_each(|n| normalize_node(n));
        }
        IndexKind::Expr(e) => normalize_node(e),
        IndexKind::Derivative { items, .. } => items.iter_mut().for_each(normalize_item),
        IndexKind::FullSlice | IndexKind::Broadcast => {}
    }
}

fn normalize_node(node: &mut Node) {
    match &mut node.kind {
        NodeKind::Lambda { params, body, .. } => {
            params.iter_mut().for_each(normalize_param);
            normalize_node(body);
            if params.is_empty() {
                let body = std::mem::replace(&mut **body, placeholder());
                *node = body;
            }
        }
        NodeKind::Apply { callee, args } => {
            normalize_node(callee);
            for a in args {
                normalize_items_in_spec(&mut a.spec);
                normalize_node(&mut a.value);
            }
        }
        NodeKind::Index { base, items } => {
            normalize_node(base);
            items.iter_mut().for_each(normalize_item);
        }
        NodeKind::EinSum { operands, .. } => operands
            .iter_mut()
            .for_each(|o| normalize_node(&mut o.expr)),
        NodeKind::Builtin { args, .. } | NodeKind::List(args) => {
            args.iter_mut().for_each(normalize_node)
        }
        NodeKind::BinOp { lhs, rhs, .. } => {
            normalize_node(lhs);
            normalize_node(rhs);
        }
        NodeKind::Neg(inner) => normalize_node(inner),
        NodeKind::Number(_) | NodeKind::NameRef { .. } => {}
    }
}

fn placeholder() -> Node {
    Node {
        kind: NodeKind::Number(0.0),
        span: Default::default(),
    }
}

/// Normalizes, resolves every name in place, and returns the diagnostics.
/// Top-level definitions come from `program` itself.
pub fn check(program: &mut Program) -> Vec<Diagnostic> {
    let globals = Globals::collect(program);
    check_with(program, &globals)
}

/// As [`check`], with top-level facts gathered elsewhere (e.g. from every
/// block of a document).
pub fn check_with(program: &mut Program, globals: &Globals) -> Vec<Diagnostic> {
    normalize(program);
    let mut c = Checker {
        globals,
        frames: Vec::new(),
        diags: Vec::new(),
    };
    for s in &mut program.statements {
        c.statement(s);
    }
    c.diags
}

struct Slot {
    name: String,
    count: Option<usize>,
}

struct Frame {
    lambda: usize,
    slots: Vec<Slot>,
    /// Slots `..visible` can be referenced; the rest are introduced later.
    visible: usize,
}

struct Checker<'g> {
    globals: &'g Globals,
    frames: Vec<Frame>,
    diags: Vec<Diagnostic>,
}

enum Found {
    Bound {
        lambda: usize,
        param: usize,
        count: Option<usize>,
    },
    Forward,
    Global,
}

impl Checker<'_> {
    fn statement(&mut self, s: &mut Statement) {
        match &mut s.kind {
            StatementKind::Signature { params, result, .. } => {
                self.params(usize::MAX, params);
                self.frames.pop();
                self.items(result);
            }
            StatementKind::Binding {
                target,
                source,
                value,
                annotations,
                ..
            } => {
                // the target is a definition; only its index expressions are uses
                if let NodeKind::Index { items, .. } = &mut target.kind {
                    self.items(items);
                }
                if let Some(src) = source {
                    self.node(src);
                }
                self.node(value);
                for a in annotations {
                    self.node(a);
                }
            }
            StatementKind::Expr { expr, annotations } => {
                self.node(expr);
                for a in annotations {
                    self.node(a);
                }
            }
        }
    }

    /// Checks a parameter list and leaves its frame pushed, fully visible.
    fn params(&mut self, lambda: usize, params: &mut [Param]) {
        let mut seen: HashSet<&str> = HashSet::new();
        for p in params.iter() {
            if !seen.insert(&p.name.name) {
                self.diags.push(Diagnostic::error(
                    Code::DuplicateSlot,
                    format!("slot '{}' appears twice in one parameter list", p.name.name),
                    p.name.span,
                ));
            }
        }
        self.frames.push(Frame {
            lambda,
            slots: params
                .iter()
                .map(|p| Slot {
                    name: p.name.name.clone(),
                    count: p.spec.index_count(),
                })
                .collect(),
            visible: 0,
        });
        for (k, p) in params.iter_mut().enumerate() {
            self.frames.last_mut().expect("pushed").visible = k;
            if let SlotSpec::Indexed(items) = &mut p.spec {
                self.items(items);
            }
            if let Some(v) = &mut p.value {
                let count = self.node(v);
                if let (Some(declared), Some(got)) = (p.spec.index_count(), count) {
                    if declared != got {
                        self.diags.push(Diagnostic::error(
                            Code::IndexCount,
                            format!("'{}' declares {declared} indices but is bound to a value with {got}", p.name.name),
                            v.span,
                        ));
                    }
                }
            }
        }
        self.frames.last_mut().expect("pushed").visible = params.len();
    }

    fn lookup(&self, name: &str) -> Found {
        for f in self.frames.iter().rev() {
            if let Some(k) = f.slots[..f.visible].iter().rposition(|s| s.name == name) {
                return Found::Bound {
                    lambda: f.lambda,
                    param: k,
                    count: f.slots[k].count,
                };
            }
            if f.slots[f.visible..].iter().any(|s| s.name == name) {
                return Found::Forward;
            }
        }
        Found::Global
    }

    /// Declared index count of a name reference, if known.
    fn name_ref(&mut self, node: &mut Node) -> Option<usize> {
        let span = node.span;
        let NodeKind::NameRef { name, resolution } = &mut node.kind else {
            unreachable!("called on a name reference");
        };
        match self.lookup(name) {
            Found::Bound {
                lambda,
                param,
                count,
            } => {
                *resolution = Some(Resolution::Bound { lambda, param });
                count
            }
            Found::Forward => {
                *resolution = Some(Resolution::Global);
                self.diags.push(Diagnostic::error(
                    Code::ForwardRef,
                    format!("'{name}' refers to a parameter introduced later in the same list"),
                    span,
                ));
                None
            }
            Found::Global => {
                *resolution = Some(Resolution::Global);
                if !self.globals.is_defined(name) {
                    self.diags.push(Diagnostic::warning(
                        Code::GlobalName,
                        format!("'{name}' is not bound here and resolves to global context"),
                        span,
                    ));
                }
                self.globals.declared.get(name.as_str()).copied().flatten()
            }
        }
    }

    /// Checks `node` and returns its index count when it can be determined.
    fn node(&mut self, node: &mut Node) -> Option<usize> {
        match &mut node.kind {
            NodeKind::Number(_) => Some(0),
            NodeKind::NameRef { .. } => self.name_ref(node),
            NodeKind::Lambda { id, params, body } => {
                self.params(*id, params);
                self.node(body);
                self.frames.pop();
                None
            }
            NodeKind::Apply { callee, args } => {
                self.node(callee);
                let mut seen: HashSet<String> = HashSet::new();
                for a in args.iter_mut() {
                    if !seen.insert(a.name.name.clone()) {
                        self.diags.push(Diagnostic::error(
                            Code::DuplicateSlot,
                            format!("keyword '{}' given twice", a.name.name),
                            a.name.span,
                        ));
                    }
                    if let SlotSpec::Indexed(items) = &mut a.spec {
                        self.items(items);
                    }
                    self.node(&mut a.value);
                }
                self.signature_result(callee)
            }
            NodeKind::Index { base, items } => {
                let base_count = match &base.kind {
                    // `f(...)[...]` indexes the call's result
                    NodeKind::Apply { .. } | NodeKind::NameRef { .. } => self.node(base),
                    _ => {
                        self.node(base);
                        None
                    }
                };
                self.items(items);
                let consumed = items.iter().filter(|i| i.kind.consumes_axis()).count();
                if let Some(n) = base_count {
                    if consumed != n {
                        let what = match base.as_name() {
                            Some(id) => format!("'{}'", id.name),
                            None => "this value".to_string(),
                        };
                        self.diags.push(Diagnostic::error(
                            Code::IndexCount,
                            format!("{what} carries {n} indices but is indexed with {consumed}"),
                            node.span,
                        ));
                    }
                }
                Some(items.iter().map(|i| i.kind.result_axes()).sum())
            }
            NodeKind::EinSum { operands, output } => {
                for o in operands.iter_mut() {
                    let count = self.node(&mut o.expr);
                    if let Some(c) = count {
                        if c != o.indices.len() {
                            self.diags.push(Diagnostic::error(
                                Code::EsIndexCount,
                                format!(
                                    "operand carries {c} indices but names {} with '@'",
                                    o.indices.len()
                                ),
                                o.span,
                            ));
                        }
                    }
                }
                Some(output.len())
            }
            NodeKind::Builtin { args, .. } => {
                for a in args {
                    self.node(a);
                }
                None
            }
            NodeKind::List(items) => {
                let counts: Vec<Option<usize>> = items.iter_mut().map(|i| self.node(i)).collect();
                match counts.first() {
                    Some(Some(c)) if counts.iter().all(|x| *x == Some(*c)) => Some(c + 1),
                    None => Some(1),
                    _ => None,
                }
            }
            NodeKind::BinOp { lhs, rhs, .. } => {
                let (a, b) = (self.node(lhs), self.node(rhs));
                match (a, b) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    _ => None,
                }
            }
            NodeKind::Neg(inner) => self.node(inner),
        }
    }

    /// Result index count of calling `callee`, from a signature declaration.
    fn signature_result(&self, callee: &Node) -> Option<usize> {
        match &callee.kind {
            NodeKind::NameRef {
                name,
                resolution: Some(Resolution::Global),
            } => self.globals.signatures.get(name).copied(),
            _ => None,
        }
    }

    fn items(&mut self, items: &mut [IndexItem]) {
        for item in items {
            match &mut item.kind {
                IndexKind::FullSlice | IndexKind::Broadcast => {}
                IndexKind::Slice { start, end } => {
                    for n in start.iter_mut().chain(end.iter_mut()) {
                        self.node(n);
                    }
                }
                IndexKind::Expr(e) => {
                    self.node(e);
                }
                IndexKind::Derivative { items: inner, .. } => {
                    for i in inner.iter() {
                        if i.kind == IndexKind::Broadcast {
                            self.diags.push(Diagnostic::error(
                                Code::BroadcastInDerivative,
                                "broadcast '+' is not allowed in a derivative index",
                                i.span,
                            ));
                        }
                    }
                    self.items(inner);
                }
            }
        }
    }
}
