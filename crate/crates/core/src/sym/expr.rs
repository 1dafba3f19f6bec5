use std::cmp::Ordering;
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, LazyLock};

use dashmap::DashMap;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::SymError;

/// A named scalar variable. Equality, ordering and hashing go through the name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// The symbol standing for the `order`-th time derivative of `self`.
    /// Order zero is the symbol itself.
    pub fn derivative(&self, order: u32) -> Symbol {
        if order == 0 {
            self.clone()
        } else {
            Symbol::new(&format!("{}^({order})", self.0))
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// One node of the expression DAG. Children are already normalized and interned.
#[derive(Clone, PartialEq, Eq)]
pub enum Node {
    Num(BigRational),
    Sym(Symbol),
    /// Flattened, like terms collected, sorted; at least two terms.
    Add(Box<[Expr]>),
    /// Flattened, like bases collected, sorted, numeric coefficient first; at least two factors.
    Mul(Box<[Expr]>),
    Pow(Expr, Expr),
    Exp(Expr),
    Ln(Expr),
}

impl Node {
    fn class(&self) -> u8 {
        match self {
            Node::Num(_) => 0,
            Node::Sym(_) => 1,
            Node::Pow(..) => 2,
            Node::Mul(_) => 3,
            Node::Add(_) => 4,
            Node::Exp(_) => 5,
            Node::Ln(_) => 6,
        }
    }

    fn structural_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.class().hash(&mut h);
        match self {
            Node::Num(r) => r.hash(&mut h),
            Node::Sym(s) => s.hash(&mut h),
            Node::Add(ts) | Node::Mul(ts) => {
                ts.len().hash(&mut h);
                for t in ts.iter() {
                    t.0.hash.hash(&mut h);
                }
            }
            Node::Pow(b, e) => {
                b.0.hash.hash(&mut h);
                e.0.hash.hash(&mut h);
            }
            Node::Exp(a) | Node::Ln(a) => a.0.hash.hash(&mut h),
        }
        h.finish()
    }

    pub fn children(&self) -> &[Expr] {
        match self {
            Node::Num(_) | Node::Sym(_) => &[],
            Node::Add(ts) | Node::Mul(ts) => ts,
            Node::Pow(b, _) => std::slice::from_ref(b),
            Node::Exp(a) | Node::Ln(a) => std::slice::from_ref(a),
        }
    }
}

impl Hash for Node {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.structural_hash());
    }
}

pub(crate) struct ExprData {
    node: Node,
    hash: u64,
    id: u64,
    free: Arc<[Symbol]>,
    rational: bool,
    size: u64,
}

/// Immutable, hash-consed symbolic expression.
///
/// Two structurally equal expressions share one allocation, so `==` is a
/// pointer comparison.
#[derive(Clone)]
pub struct Expr(Arc<ExprData>);

static INTERNER: LazyLock<DashMap<Node, Expr>> = LazyLock::new(DashMap::new);
static NEXT_ID: AtomicU64 = AtomicU64::new(0);

fn merge_free(a: &Arc<[Symbol]>, b: &Arc<[Symbol]>) -> Arc<[Symbol]> {
    if b.is_empty() || Arc::ptr_eq(a, b) {
        return a.clone();
    }
    if a.is_empty() {
        return b.clone();
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    if out.len() == a.len() {
        a.clone()
    } else {
        out.into()
    }
}

fn intern(node: Node) -> Expr {
    if let Some(e) = INTERNER.get(&node) {
        return e.clone();
    }
    let hash = node.structural_hash();
    let (free, rational, size) = match &node {
        Node::Num(_) => (Arc::from(Vec::new()), true, 1),
        Node::Sym(s) => (Arc::from(vec![s.clone()]), true, 1),
        Node::Pow(b, e) => {
            let int_exp = matches!(&e.0.node, Node::Num(r) if r.is_integer());
            (
                merge_free(&b.0.free, &e.0.free),
                b.0.rational && int_exp,
                1 + b.0.size.saturating_add(e.0.size),
            )
        }
        Node::Exp(a) | Node::Ln(a) => (a.0.free.clone(), false, 1 + a.0.size),
        Node::Add(ts) | Node::Mul(ts) => {
            let mut free: Arc<[Symbol]> = Arc::from(Vec::new());
            let mut rational = true;
            let mut size = 1u64;
            for t in ts.iter() {
                free = merge_free(&free, &t.0.free);
                rational &= t.0.rational;
                size = size.saturating_add(t.0.size);
            }
            (free, rational, size)
        }
    };
    INTERNER
        .entry(node.clone())
        .or_insert_with(|| {
            Expr(Arc::new(ExprData {
                node,
                hash,
                id: NEXT_ID.fetch_add(1, AtomicOrdering::Relaxed),
                free,
                rational,
                size,
            }))
        })
        .clone()
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Total term order: node class, then symbol name / numeric value, then
/// structural hash, then children.
impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        let (a, b) = (&self.0.node, &other.0.node);
        a.class().cmp(&b.class()).then_with(|| match (a, b) {
            (Node::Num(x), Node::Num(y)) => x.cmp(y),
            (Node::Sym(x), Node::Sym(y)) => x.cmp(y),
            _ => self.0.hash.cmp(&other.0.hash).then_with(|| {
                let (ca, cb) = (all_children(a), all_children(b));
                ca.len().cmp(&cb.len()).then_with(|| ca.iter().cmp(cb.iter()))
            }),
        })
    }
}

fn all_children(n: &Node) -> Vec<&Expr> {
    match n {
        Node::Pow(b, e) => vec![b, e],
        other => other.children().iter().collect(),
    }
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Process-unique identity of this interned node.
    pub fn id(&self) -> u64 {
        self.0.id
    }

    /// Sorted free symbols.
    pub fn free_symbols(&self) -> &[Symbol] {
        &self.0.free
    }

    pub fn depends_on(&self, s: &Symbol) -> bool {
        self.0.free.binary_search(s).is_ok()
    }

    /// True when the expression only uses `+ * ^integer` over rationals and symbols,
    /// so it can be evaluated exactly or in a prime field.
    pub fn is_rational(&self) -> bool {
        self.0.rational
    }

    /// Tree size counting shared subterms once per occurrence (saturating).
    pub fn tree_size(&self) -> u64 {
        self.0.size
    }

    pub fn num(r: BigRational) -> Expr {
        intern(Node::Num(r))
    }

    pub fn int(i: i64) -> Expr {
        Expr::num(BigRational::from_integer(BigInt::from(i)))
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::num(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Expr {
        static ZERO: LazyLock<Expr> = LazyLock::new(|| Expr::int(0));
        ZERO.clone()
    }

    pub fn one() -> Expr {
        static ONE: LazyLock<Expr> = LazyLock::new(|| Expr::int(1));
        ONE.clone()
    }

    pub fn sym(s: &Symbol) -> Expr {
        intern(Node::Sym(s.clone()))
    }

    pub fn var(name: &str) -> Expr {
        Expr::sym(&Symbol::new(name))
    }

    pub fn as_num(&self) -> Option<&BigRational> {
        match &self.0.node {
            Node::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match &self.0.node {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num().is_some_and(|r| r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_num().is_some_and(|r| r.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.0.free.is_empty()
    }

    /// Normalized sum. The result is monic: the largest term (ignoring
    /// coefficients) has coefficient 1, and any other leading coefficient
    /// is pulled out as `c * (sum)`. Terms of the form `c * (sum)` are
    /// distributed, so equal sums cancel.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut constant = BigRational::zero();
        let mut collected: indexmap::IndexMap<Expr, BigRational> = indexmap::IndexMap::new();
        let mut stack: Vec<(BigRational, Expr)> = terms.into_iter().map(|t| (BigRational::one(), t)).collect();
        while let Some((k, t)) = stack.pop() {
            match &t.0.node {
                Node::Num(c) => constant += k * c,
                Node::Add(ts) => stack.extend(ts.iter().map(|u| (k.clone(), u.clone()))),
                Node::Mul(fs) => match &fs[0].0.node {
                    Node::Num(c) => {
                        let k = k * c;
                        if fs.len() == 2 {
                            stack.push((k, fs[1].clone()));
                        } else {
                            *collected
                                .entry(intern(Node::Mul(fs[1..].into())))
                                .or_insert_with(BigRational::zero) += k;
                        }
                    }
                    _ => *collected.entry(t.clone()).or_insert_with(BigRational::zero) += k,
                },
                _ => *collected.entry(t.clone()).or_insert_with(BigRational::zero) += k,
            }
        }
        let mut terms: Vec<(Expr, BigRational)> = collected.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        match (terms.len(), constant.is_zero()) {
            (0, _) => return Expr::num(constant),
            (1, true) => {
                let (t, c) = terms.pop().unwrap();
                return scale(c, t);
            }
            _ => {}
        }
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let lead = terms.last().unwrap().1.clone();
        let mut out: Vec<Expr> = terms.into_iter().map(|(t, c)| scale(c / &lead, t)).collect();
        if !constant.is_zero() {
            out.push(Expr::num(constant / &lead));
        }
        out.sort();
        let monic = intern(Node::Add(out.into()));
        if lead.is_one() {
            monic
        } else {
            intern(Node::Mul(vec![Expr::num(lead), monic].into()))
        }
    }

    /// Normalized product.
    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut coeff = BigRational::one();
        let mut bases: indexmap::IndexMap<Expr, Vec<Expr>> = indexmap::IndexMap::new();
        let mut stack: Vec<Expr> = factors.into_iter().collect();
        while let Some(f) = stack.pop() {
            match &f.0.node {
                Node::Num(c) => {
                    if c.is_zero() {
                        return Expr::zero();
                    }
                    coeff *= c;
                }
                Node::Mul(fs) => stack.extend(fs.iter().cloned()),
                Node::Pow(b, e) => bases.entry(b.clone()).or_default().push(e.clone()),
                _ => bases.entry(f.clone()).or_default().push(Expr::one()),
            }
        }
        let mut out = Vec::with_capacity(bases.len());
        let mut regroup = false;
        for (base, exps) in bases {
            let exp = if exps.len() == 1 {
                exps.into_iter().next().unwrap()
            } else {
                Expr::sum(exps)
            };
            // Bases are never the literal zero, so this cannot divide by zero.
            let p = base.pow(&exp).expect("non-zero base");
            match &p.0.node {
                Node::Num(c) => {
                    if c.is_zero() {
                        return Expr::zero();
                    }
                    coeff *= c;
                }
                Node::Mul(_) => {
                    regroup = true;
                    out.push(p);
                }
                _ => out.push(p),
            }
        }
        if regroup {
            out.push(Expr::num(coeff));
            return Expr::product(out);
        }
        out.sort();
        if out.is_empty() {
            return Expr::num(coeff);
        }
        if coeff.is_one() && out.len() == 1 {
            return out.pop().unwrap();
        }
        if !coeff.is_one() {
            out.insert(0, Expr::num(coeff));
        }
        intern(Node::Mul(out.into()))
    }

    /// `self ^ exponent`, normalized.
    pub fn pow(&self, exponent: &Expr) -> Result<Expr, SymError> {
        if exponent.is_zero() {
            return Ok(Expr::one());
        }
        if exponent.is_one() {
            return Ok(self.clone());
        }
        let int_exp = exponent.as_num().filter(|r| r.is_integer()).map(|r| r.to_integer());
        match &self.0.node {
            Node::Num(b) => {
                if b.is_zero() {
                    return match exponent.as_num() {
                        Some(e) if e.is_positive() => Ok(Expr::zero()),
                        Some(_) => Err(SymError::DivisionByZero),
                        // Symbolic exponents are taken as generic, hence positive.
                        None => Ok(Expr::zero()),
                    };
                }
                if b.is_one() {
                    return Ok(Expr::one());
                }
                if let Some(n) = int_exp.as_ref().and_then(|n| n.to_i32()) {
                    if n.unsigned_abs() <= 4096 {
                        let v = if n >= 0 {
                            num_traits::pow(b.clone(), n as usize)
                        } else {
                            num_traits::pow(b.recip(), n.unsigned_abs() as usize)
                        };
                        return Ok(Expr::num(v));
                    }
                }
                Ok(intern(Node::Pow(self.clone(), exponent.clone())))
            }
            Node::Pow(b, e) if int_exp.is_some() => b.pow(&(e * exponent)),
            Node::Mul(fs) if int_exp.is_some() => {
                let parts = fs.iter().map(|f| f.pow(exponent)).collect::<Result<Vec<_>, _>>()?;
                Ok(Expr::product(parts))
            }
            Node::Exp(a) => Ok(Expr::exp(&(a * exponent))),
            _ => Ok(intern(Node::Pow(self.clone(), exponent.clone()))),
        }
    }

    pub fn powi(&self, n: i64) -> Result<Expr, SymError> {
        self.pow(&Expr::int(n))
    }

    pub fn recip(&self) -> Result<Expr, SymError> {
        self.powi(-1)
    }

    pub fn checked_div(&self, rhs: &Expr) -> Result<Expr, SymError> {
        Ok(self * &rhs.recip()?)
    }

    pub fn exp(arg: &Expr) -> Expr {
        if arg.is_zero() {
            return Expr::one();
        }
        if let Node::Ln(a) = &arg.0.node {
            return a.clone();
        }
        intern(Node::Exp(arg.clone()))
    }

    pub fn ln(arg: &Expr) -> Result<Expr, SymError> {
        if arg.is_one() {
            return Ok(Expr::zero());
        }
        if arg.is_zero() {
            return Err(SymError::LogOfZero);
        }
        if let Node::Exp(a) = &arg.0.node {
            return Ok(a.clone());
        }
        Ok(intern(Node::Ln(arg.clone())))
    }

    /// Rebuild this node with new children through the normalizing constructors.
    pub(crate) fn rebuild(&self, children: &[Expr]) -> Result<Expr, SymError> {
        Ok(match &self.0.node {
            Node::Num(_) | Node::Sym(_) => self.clone(),
            Node::Add(_) => Expr::sum(children.iter().cloned()),
            Node::Mul(_) => Expr::product(children.iter().cloned()),
            Node::Pow(..) => children[0].pow(&children[1])?,
            Node::Exp(_) => Expr::exp(&children[0]),
            Node::Ln(_) => Expr::ln(&children[0])?,
        })
    }

    /// Children in evaluation order (for `Pow`, base then exponent).
    pub(crate) fn operands(&self) -> Vec<Expr> {
        match &self.0.node {
            Node::Pow(b, e) => vec![b.clone(), e.clone()],
            n => n.children().to_vec(),
        }
    }
}

fn scale(c: BigRational, t: Expr) -> Expr {
    if c.is_one() {
        return t;
    }
    match &t.0.node {
        Node::Mul(fs) => {
            let mut v = Vec::with_capacity(fs.len() + 1);
            v.push(Expr::num(c));
            v.extend(fs.iter().cloned());
            intern(Node::Mul(v.into()))
        }
        _ => intern(Node::Mul(vec![Expr::num(c), t].into())),
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                std::ops::$tr::$method(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                std::ops::$tr::$method(&self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                std::ops::$tr::$method(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::sum([a.clone(), b.clone()]));
binop!(Mul, mul, |a, b| Expr::product([a.clone(), b.clone()]));
binop!(Sub, sub, |a, b| Expr::sum([a.clone(), -b]));

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product([Expr::int(-1), self.clone()])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}
