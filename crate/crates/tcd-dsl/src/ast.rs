use serde::Serialize;

use crate::token::Span;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Program {
    pub statements: Vec<Statement>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Statement {
    pub kind: StatementKind,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AssignOp {
    /// `=`
    Assign,
    /// `:=`
    Define,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StatementKind {
    /// `name: ^(params) => [result]`
    Signature {
        name: Ident,
        params: Vec<Param>,
        result: Vec<IndexItem>,
    },
    /// `target = value`, or `source -> target := value`. Any further
    /// `= expr` links are recorded in `annotations`.
    Binding {
        target: Node,
        source: Option<Node>,
        op: AssignOp,
        value: Node,
        annotations: Vec<Node>,
    },
    /// A bare expression, possibly followed by `= expr` annotations.
    Expr { expr: Node, annotations: Vec<Node> },
}

impl StatementKind {
    /// Name introduced at top level, with its declared index list if the
    /// target carries one.
    pub fn defines(&self) -> Option<(Ident, Option<&[IndexItem]>)> {
        match self {
            StatementKind::Signature { name, .. } => Some((name.clone(), None)),
            StatementKind::Binding { target, .. } => target.as_declaration(),
            StatementKind::Expr { .. } => None,
        }
    }
}

/// What a lambda parameter or keyword argument slot holds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SlotSpec {
    /// `x[:, :]`
    Indexed(Vec<IndexItem>),
    /// `f{}`
    Function,
    /// `x`, index count left open.
    Bare,
}

impl SlotSpec {
    /// Declared number of indices, when the slot declares one.
    pub fn index_count(&self) -> Option<usize> {
        match self {
            SlotSpec::Indexed(items) => Some(items.len()),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Param {
    pub name: Ident,
    pub spec: SlotSpec,
    /// Immediately bound value.
    pub value: Option<Node>,
    pub span: Span,
}

impl Param {
    pub fn is_function_slot(&self) -> bool {
        self.spec == SlotSpec::Function
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeywordArg {
    pub name: Ident,
    pub spec: SlotSpec,
    pub value: Node,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexItem {
    pub kind: IndexKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum IndexKind {
    /// `:`
    FullSlice,
    /// `a:`, `:b`, `a:b`
    Slice {
        start: Option<Box<Node>>,
        end: Option<Box<Node>>,
    },
    /// An integer-valued expression; removes the axis.
    Expr(Box<Node>),
    /// `d x[...]`: splices the indices of `x`.
    Derivative { name: Ident, items: Vec<IndexItem> },
    /// `+`: a new axis of length one.
    Broadcast,
}

impl IndexKind {
    /// Whether the item selects along one axis of the indexed quantity.
    pub fn consumes_axis(&self) -> bool {
        matches!(
            self,
            IndexKind::FullSlice | IndexKind::Slice { .. } | IndexKind::Expr(_)
        )
    }

    /// Number of axes this item contributes to the result.
    pub fn result_axes(&self) -> usize {
        match self {
            IndexKind::FullSlice | IndexKind::Slice { .. } | IndexKind::Broadcast => 1,
            IndexKind::Expr(_) => 0,
            IndexKind::Derivative { items, .. } => items.len(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Where a name reference was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Resolution {
    /// Parameter `param` of the lambda numbered `lambda`.
    Bound { lambda: usize, param: usize },
    /// Not bound by any enclosing lambda.
    Global,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EsOperand {
    pub expr: Node,
    pub indices: Vec<Ident>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Node {
    pub kind: NodeKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum NodeKind {
    /// `id` numbers lambdas in source order within one parse.
    Lambda {
        id: usize,
        params: Vec<Param>,
        body: Box<Node>,
    },
    Apply {
        callee: Box<Node>,
        args: Vec<KeywordArg>,
    },
    Index {
        base: Box<Node>,
        items: Vec<IndexItem>,
    },
    /// `&es(x @ a, b; y @ b -> a)`
    EinSum {
        operands: Vec<EsOperand>,
        output: Vec<Ident>,
    },
    /// `&name(args)` other than `&es`.
    Builtin {
        name: String,
        args: Vec<Node>,
    },
    BinOp {
        op: BinOp,
        lhs: Box<Node>,
        rhs: Box<Node>,
    },
    Neg(Box<Node>),
    Number(f64),
    NameRef {
        name: String,
        resolution: Option<Resolution>,
    },
    List(Vec<Node>),
}

impl Node {
    /// `x` or `x[:, :]` as an assignment target.
    pub fn as_declaration(&self) -> Option<(Ident, Option<&[IndexItem]>)> {
        match &self.kind {
            NodeKind::Index { base, items } => Some((base.as_name()?, Some(items.as_slice()))),
            _ => Some((self.as_name()?, None)),
        }
    }

    pub fn as_name(&self) -> Option<Ident> {
        match &self.kind {
            NodeKind::NameRef { name, .. } => Some(Ident {
                name: name.clone(),
                span: self.span,
            }),
            _ => None,
        }
    }
}
