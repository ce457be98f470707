use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Csr, Matrix};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Pointwise nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Identity,
    Sigmoid,
    Relu,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Relu => x.max(0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Sigmoid => "sigmoid",
            Activation::Relu => "relu",
        }
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "identity" => Ok(Activation::Identity),
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            other => Err(format!("expected identity|sigmoid|relu, got `{other}`")),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    MulRow(Var, Var),
    ScaleRows(Var, Vec<f64>),
    MulConst(Var, Matrix),
    Spmm(Arc<Csr>, Var),
    Act(Var, Activation),
    RowSoftmax(Var),
    ConcatCols(Vec<Var>),
    Transpose(Var),
    GatherRows(Var, Vec<usize>),
    StackRows(Vec<Var>),
    ColumnNorm(Var, Vec<f64>),
    RowNorm(Var, Vec<f64>),
    SumAll(Var),
    CrossEntropy {
        logits: Var,
        rows: Vec<usize>,
        labels: Vec<usize>,
        probs: Matrix,
    },
}

struct Node {
    value: Matrix,
    op: Op,
    requires_grad: bool,
}

/// Records operations in creation order (which is a topological order) and
/// replays them backwards to compute gradients. A tape is built fresh for
/// every forward pass.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients produced by [`Tape::backward`], indexed by [`Var`].
pub struct Gradients {
    grads: Vec<Option<Matrix>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Matrix> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn push(&mut self, value: Matrix, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn any_grad(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    /// Differentiable leaf.
    pub fn variable(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Leaf that receives no gradient.
    pub fn constant(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(value, Op::MatMul(a, b), rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::shape(
                "add",
                format!("{:?} + {:?}", self.shape(a), self.shape(b)),
            ));
        }
        let value = self.value(a).zip_map(self.value(b), |x, y| x + y);
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(value, Op::Add(a, b), rg))
    }

    /// Adds a `1 x n` row to every row of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (r, c) = self.shape(a);
        if self.shape(row) != (1, c) {
            return Err(Error::shape(
                "add_row",
                format!("{:?} + row {:?}", (r, c), self.shape(row)),
            ));
        }
        let mut value = self.value(a).clone();
        let bias = self.value(row).data().to_vec();
        for i in 0..r {
            for (x, b) in value.row_mut(i).iter_mut().zip(&bias) {
                *x += b;
            }
        }
        let rg = self.any_grad(&[a, row]);
        Ok(self.push(value, Op::AddRow(a, row), rg))
    }

    /// Multiplies every row of `a` elementwise by a `1 x n` row.
    pub fn mul_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (r, c) = self.shape(a);
        if self.shape(row) != (1, c) {
            return Err(Error::shape(
                "mul_row",
                format!("{:?} * row {:?}", (r, c), self.shape(row)),
            ));
        }
        let mut value = self.value(a).clone();
        let scale = self.value(row).data().to_vec();
        for i in 0..r {
            for (x, s) in value.row_mut(i).iter_mut().zip(&scale) {
                *x *= s;
            }
        }
        let rg = self.any_grad(&[a, row]);
        Ok(self.push(value, Op::MulRow(a, row), rg))
    }

    /// Multiplies row `i` of `a` by the constant `scale[i]`.
    pub fn scale_rows(&mut self, a: Var, scale: Vec<f64>) -> Result<Var> {
        let (r, _) = self.shape(a);
        if scale.len() != r {
            return Err(Error::shape(
                "scale_rows",
                format!("{} scales for {r} rows", scale.len()),
            ));
        }
        let mut value = self.value(a).clone();
        for (i, s) in scale.iter().enumerate() {
            for x in value.row_mut(i) {
                *x *= s;
            }
        }
        let rg = self.any_grad(&[a]);
        Ok(self.push(value, Op::ScaleRows(a, scale), rg))
    }

    /// Elementwise product with a constant matrix (dropout masks).
    pub fn mul_const(&mut self, a: Var, mask: Matrix) -> Result<Var> {
        if self.shape(a) != mask.shape() {
            return Err(Error::shape(
                "mul_const",
                format!("{:?} * {:?}", self.shape(a), mask.shape()),
            ));
        }
        let value = self.value(a).zip_map(&mask, |x, m| x * m);
        let rg = self.any_grad(&[a]);
        Ok(self.push(value, Op::MulConst(a, mask), rg))
    }

    /// Sparse-dense product `s · a` with a constant sparse operand.
    pub fn spmm(&mut self, s: Arc<Csr>, a: Var) -> Result<Var> {
        let value = s.spmm(self.value(a))?;
        let rg = self.any_grad(&[a]);
        Ok(self.push(value, Op::Spmm(s, a), rg))
    }

    pub fn elementwise(&mut self, act: Activation, a: Var) -> Var {
        if act == Activation::Identity {
            return a;
        }
        let value = self.value(a).map(|x| act.apply(x));
        let rg = self.any_grad(&[a]);
        self.push(value, Op::Act(a, act), rg)
    }

    /// Row-wise softmax, stabilised by subtracting each row's maximum.
    pub fn row_softmax(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let mut value = x.clone();
        for i in 0..x.rows() {
            softmax_in_place(value.row_mut(i));
        }
        let rg = self.any_grad(&[a]);
        self.push(value, Op::RowSoftmax(a), rg)
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let rows = parts.first().map_or(0, |&p| self.shape(p).0);
        if parts.iter().any(|&p| self.shape(p).0 != rows) {
            return Err(Error::shape("concat_cols", "row counts differ"));
        }
        let cols: usize = parts.iter().map(|&p| self.shape(p).1).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for &p in parts {
                data.extend_from_slice(self.value(p).row(i));
            }
        }
        let value = Matrix::from_vec(rows, cols, data)?;
        let rg = self.any_grad(parts);
        Ok(self.push(value, Op::ConcatCols(parts.to_vec()), rg))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let value = self.value(a).transpose();
        let rg = self.any_grad(&[a]);
        self.push(value, Op::Transpose(a), rg)
    }

    pub fn gather_rows(&mut self, a: Var, rows: &[usize]) -> Result<Var> {
        let src = self.value(a);
        if let Some(&bad) = rows.iter().find(|&&r| r >= src.rows()) {
            return Err(Error::shape("gather_rows", format!("row {bad} out of {}", src.rows())));
        }
        let mut data = Vec::with_capacity(rows.len() * src.cols());
        for &r in rows {
            data.extend_from_slice(src.row(r));
        }
        let value = Matrix::from_vec(rows.len(), src.cols(), data)?;
        let rg = self.any_grad(&[a]);
        Ok(self.push(value, Op::GatherRows(a, rows.to_vec()), rg))
    }

    pub fn stack_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let cols = parts.first().map_or(0, |&p| self.shape(p).1);
        if parts.iter().any(|&p| self.shape(p).1 != cols) {
            return Err(Error::shape("stack_rows", "column counts differ"));
        }
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            data.extend_from_slice(self.value(p).data());
            rows += self.shape(p).0;
        }
        let value = Matrix::from_vec(rows, cols, data)?;
        let rg = self.any_grad(parts);
        Ok(self.push(value, Op::StackRows(parts.to_vec()), rg))
    }

    /// Normalises each column to zero mean and unit (biased) variance over
    /// the rows. Returns the output together with the batch mean and variance.
    pub fn column_norm(&mut self, a: Var, eps: f64) -> (Var, Vec<f64>, Vec<f64>) {
        let x = self.value(a);
        let (r, c) = x.shape();
        let n = r.max(1) as f64;
        let mean: Vec<f64> = x.column_sums().data().iter().map(|s| s / n).collect();
        let mut var = vec![0.0; c];
        for i in 0..r {
            for (j, v) in x.row(i).iter().enumerate() {
                var[j] += (v - mean[j]).powi(2);
            }
        }
        var.iter_mut().for_each(|v| *v /= n);
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + eps).sqrt()).collect();
        let mut value = x.clone();
        for i in 0..r {
            for (j, v) in value.row_mut(i).iter_mut().enumerate() {
                *v = (*v - mean[j]) * inv_std[j];
            }
        }
        let rg = self.any_grad(&[a]);
        (self.push(value, Op::ColumnNorm(a, inv_std), rg), mean, var)
    }

    /// Normalises each row to zero mean and unit (biased) variance.
    pub fn row_norm(&mut self, a: Var, eps: f64) -> Var {
        let x = self.value(a);
        let (r, c) = x.shape();
        let mut value = x.clone();
        let mut inv_stds = Vec::with_capacity(r);
        for i in 0..r {
            let row = value.row_mut(i);
            let mean = row.iter().sum::<f64>() / c as f64;
            let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / c as f64;
            let inv = 1.0 / (var + eps).sqrt();
            row.iter_mut().for_each(|v| *v = (*v - mean) * inv);
            inv_stds.push(inv);
        }
        let rg = self.any_grad(&[a]);
        self.push(value, Op::RowNorm(a, inv_stds), rg)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = Matrix::scalar(self.value(a).sum());
        let rg = self.any_grad(&[a]);
        self.push(value, Op::SumAll(a), rg)
    }

    /// Mean over `rows` of `-log softmax(logits[row])[label]`.
    pub fn cross_entropy(&mut self, logits: Var, rows: &[usize], labels: &[usize]) -> Result<Var> {
        if rows.is_empty() {
            return Err(Error::Contract("cross entropy over an empty row set".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::shape("cross_entropy", "rows and labels differ in length"));
        }
        let x = self.value(logits);
        let (r, c) = x.shape();
        let mut probs = Matrix::zeros(rows.len(), c);
        let mut loss = 0.0;
        for (k, (&row, &label)) in rows.iter().zip(labels).enumerate() {
            if row >= r || label >= c {
                return Err(Error::shape(
                    "cross_entropy",
                    format!("row {row} / label {label} outside {r}x{c} logits"),
                ));
            }
            let src = x.row(row);
            let max = src.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let log_z = max + src.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            loss -= src[label] - log_z;
            for (p, v) in probs.row_mut(k).iter_mut().zip(src) {
                *p = (v - log_z).exp();
            }
        }
        let value = Matrix::scalar(loss / rows.len() as f64);
        let rg = self.any_grad(&[logits]);
        Ok(self.push(
            value,
            Op::CrossEntropy {
                logits,
                rows: rows.to_vec(),
                labels: labels.to_vec(),
                probs,
            },
            rg,
        ))
    }

    /// Reverse sweep from a scalar `loss`. Gradients accumulate additively
    /// where a value fans out to several consumers.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if self.shape(loss) != (1, 1) {
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.shape(loss)
            )));
        }
        let mut grads: Vec<Option<Matrix>> = (0..=loss.0).map(|_| None).collect();
        grads[loss.0] = Some(Matrix::scalar(1.0));

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if node.requires_grad {
                self.propagate(node, &g, &mut grads)?;
            }
            grads[i] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn accumulate(&self, grads: &mut [Option<Matrix>], v: Var, g: Matrix) {
        if !self.nodes[v.0].requires_grad {
            return;
        }
        match &mut grads[v.0] {
            Some(acc) => acc.add_assign(&g),
            slot => *slot = Some(g),
        }
    }

    fn propagate(&self, node: &Node, g: &Matrix, grads: &mut [Option<Matrix>]) -> Result<()> {
        let y = &node.value;
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if self.requires_grad(*a) {
                    self.accumulate(grads, *a, g.matmul_nt(self.value(*b))?);
                }
                if self.requires_grad(*b) {
                    self.accumulate(grads, *b, self.value(*a).matmul_tn(g)?);
                }
            }
            Op::Add(a, b) => {
                self.accumulate(grads, *a, g.clone());
                self.accumulate(grads, *b, g.clone());
            }
            Op::AddRow(a, row) => {
                self.accumulate(grads, *a, g.clone());
                self.accumulate(grads, *row, g.column_sums());
            }
            Op::MulRow(a, row) => {
                let scale = self.value(*row);
                if self.requires_grad(*a) {
                    let mut ga = g.clone();
                    for i in 0..ga.rows() {
                        for (x, s) in ga.row_mut(i).iter_mut().zip(scale.data()) {
                            *x *= s;
                        }
                    }
                    self.accumulate(grads, *a, ga);
                }
                if self.requires_grad(*row) {
                    let prod = g.zip_map(self.value(*a), |p, q| p * q);
                    self.accumulate(grads, *row, prod.column_sums());
                }
            }
            Op::ScaleRows(a, scale) => {
                let mut ga = g.clone();
                for (i, s) in scale.iter().enumerate() {
                    ga.row_mut(i).iter_mut().for_each(|x| *x *= s);
                }
                self.accumulate(grads, *a, ga);
            }
            Op::MulConst(a, mask) => {
                self.accumulate(grads, *a, g.zip_map(mask, |p, m| p * m));
            }
            Op::Spmm(s, a) => {
                self.accumulate(grads, *a, s.spmm_t(g)?);
            }
            Op::Act(a, act) => {
                let ga = match act {
                    Activation::Identity => g.clone(),
                    Activation::Sigmoid => g.zip_map(y, |p, s| p * s * (1.0 - s)),
                    Activation::Relu => g.zip_map(self.value(*a), |p, x| if x > 0.0 { p } else { 0.0 }),
                };
                self.accumulate(grads, *a, ga);
            }
            Op::RowSoftmax(a) => {
                let mut ga = g.zip_map(y, |p, s| p * s);
                for i in 0..ga.rows() {
                    let dot: f64 = g.row(i).iter().zip(y.row(i)).map(|(p, s)| p * s).sum();
                    for (out, s) in ga.row_mut(i).iter_mut().zip(y.row(i)) {
                        *out -= s * dot;
                    }
                }
                self.accumulate(grads, *a, ga);
            }
            Op::ConcatCols(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let (r, c) = self.shape(p);
                    if self.requires_grad(p) {
                        let mut gp = Matrix::zeros(r, c);
                        for i in 0..r {
                            gp.row_mut(i).copy_from_slice(&g.row(i)[offset..offset + c]);
                        }
                        self.accumulate(grads, p, gp);
                    }
                    offset += c;
                }
            }
            Op::Transpose(a) => self.accumulate(grads, *a, g.transpose()),
            Op::GatherRows(a, rows) => {
                let (r, c) = self.shape(*a);
                let mut ga = Matrix::zeros(r, c);
                for (k, &src) in rows.iter().enumerate() {
                    for (x, v) in ga.row_mut(src).iter_mut().zip(g.row(k)) {
                        *x += v;
                    }
                }
                self.accumulate(grads, *a, ga);
            }
            Op::StackRows(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let (r, c) = self.shape(p);
                    if self.requires_grad(p) {
                        let slice = g.data()[offset * c..(offset + r) * c].to_vec();
                        self.accumulate(grads, p, Matrix::from_vec(r, c, slice)?);
                    }
                    offset += r;
                }
            }
            Op::ColumnNorm(a, inv_std) => {
                let (r, c) = y.shape();
                let n = r as f64;
                let sum_g = g.column_sums();
                let sum_gy = g.zip_map(y, |p, q| p * q).column_sums();
                let mut ga = Matrix::zeros(r, c);
                for i in 0..r {
                    for (j, &s) in inv_std.iter().enumerate() {
                        let v = s / n * (n * g.get(i, j) - sum_g.data()[j] - y.get(i, j) * sum_gy.data()[j]);
                        ga.set(i, j, v);
                    }
                }
                self.accumulate(grads, *a, ga);
            }
            Op::RowNorm(a, inv_std) => {
                let (r, c) = y.shape();
                let n = c as f64;
                let mut ga = Matrix::zeros(r, c);
                for (i, &s) in inv_std.iter().enumerate().take(r) {
                    let gr = g.row(i);
                    let yr = y.row(i);
                    let sum_g: f64 = gr.iter().sum();
                    let sum_gy: f64 = gr.iter().zip(yr).map(|(p, q)| p * q).sum();
                    for (j, out) in ga.row_mut(i).iter_mut().enumerate() {
                        *out = s / n * (n * gr[j] - sum_g - yr[j] * sum_gy);
                    }
                }
                self.accumulate(grads, *a, ga);
            }
            Op::SumAll(a) => {
                let (r, c) = self.shape(*a);
                self.accumulate(grads, *a, Matrix::filled(r, c, g.data()[0]));
            }
            Op::CrossEntropy {
                logits,
                rows,
                labels,
                probs,
            } => {
                let (r, c) = self.shape(*logits);
                let scale = g.data()[0] / rows.len() as f64;
                let mut ga = Matrix::zeros(r, c);
                for (k, (&row, &label)) in rows.iter().zip(labels).enumerate() {
                    let out = ga.row_mut(row);
                    for (j, p) in probs.row(k).iter().enumerate() {
                        let target = if j == label { 1.0 } else { 0.0 };
                        out[j] += scale * (p - target);
                    }
                }
                self.accumulate(grads, *logits, ga);
            }
        }
        Ok(())
    }
}

pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    row.iter_mut().for_each(|v| *v /= total);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_gradient_is_all_ones() {
        let mut t = Tape::new();
        let x = t.variable(Matrix::from_rows(&[[1.0, -2.0], [3.0, 0.5]]).unwrap());
        let loss = t.sum(x);
        let g = t.backward(loss).unwrap();
        assert_eq!(g.get(x).unwrap(), &Matrix::filled(2, 2, 1.0));
    }

    #[test]
    fn sigmoid_at_zero() {
        let mut t = Tape::new();
        let x = t.variable(Matrix::zeros(2, 3));
        let s = t.elementwise(Activation::Sigmoid, x);
        assert!(t.value(s).data().iter().all(|&v| v == 0.5));
        let loss = t.sum(s);
        let g = t.backward(loss).unwrap();
        assert!(g.get(x).unwrap().data().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn relu_and_identity() {
        let mut t = Tape::new();
        let x = t.variable(Matrix::row_vector(vec![-3.0, 3.0]));
        let r = t.elementwise(Activation::Relu, x);
        assert_eq!(t.value(r).data(), &[0.0, 3.0]);
        let id = t.elementwise(Activation::Identity, x);
        assert_eq!(id, x);
        let loss = t.sum(id);
        assert_eq!(t.backward(loss).unwrap().get(x).unwrap().data(), &[1.0, 1.0]);
    }

    #[test]
    fn fan_out_accumulates() {
        let mut t = Tape::new();
        let x = t.variable(Matrix::row_vector(vec![1.0, 2.0]));
        let y = t.add(x, x).unwrap();
        let loss = t.sum(y);
        assert_eq!(t.backward(loss).unwrap().get(x).unwrap().data(), &[2.0, 2.0]);
    }

    #[test]
    fn softmax_is_stable_and_uniform_on_zeros() {
        let mut t = Tape::new();
        let x = t.constant(Matrix::zeros(1, 7));
        let s = t.row_softmax(x);
        assert!(t.value(s).data().iter().all(|&v| (v - 1.0 / 7.0).abs() < 1e-15));
        let big = t.constant(Matrix::row_vector(vec![1000.0, 1000.0]));
        let s = t.row_softmax(big);
        assert_eq!(t.value(s).data(), &[0.5, 0.5]);
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let mut t = Tape::new();
        let x = t.variable(Matrix::zeros(2, 2));
        assert!(matches!(t.backward(x), Err(Error::Contract(_))));
    }

    #[test]
    fn uniform_logits_cross_entropy_is_log_c() {
        let mut t = Tape::new();
        let x = t.variable(Matrix::zeros(3, 7));
        let loss = t.cross_entropy(x, &[0, 2], &[1, 6]).unwrap();
        assert!((t.value(loss).data()[0] - 7f64.ln()).abs() < 1e-12);
        assert!(t.cross_entropy(x, &[], &[]).is_err());
    }

    #[test]
    fn constants_get_no_gradient() {
        let mut t = Tape::new();
        let c = t.constant(Matrix::identity(2));
        let w = t.variable(Matrix::filled(2, 1, 0.5));
        let y = t.matmul(c, w).unwrap();
        let loss = t.sum(y);
        let g = t.backward(loss).unwrap();
        assert!(g.get(c).is_none());
        assert_eq!(g.get(w).unwrap().data(), &[1.0, 1.0]);
    }
}
