use std::collections::{BTreeSet, HashMap};

use crate::alphabet::{length_lex, Word};
use crate::automaton::QuotientPdfa;
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::model::LanguageModel;
use crate::relation::{ClassSignature, Equivalence};

/// The class signatures of one row, one per suffix in column order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowSignature(pub Vec<ClassSignature>);

impl RowSignature {
    /// Projection onto the first `n` columns.
    pub fn prefix(&self, n: usize) -> RowSignature {
        RowSignature(self.0[..n.min(self.0.len())].to_vec())
    }
}

/// Two equal red rows whose `σ`-continuations differ at suffix `suffix`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inconsistency {
    pub p: Word,
    pub p2: Word,
    pub symbol: usize,
    pub suffix: Word,
}

impl Inconsistency {
    /// The column to add, `σs`.
    pub fn new_suffix(&self) -> Word {
        let mut s = vec![self.symbol];
        s.extend_from_slice(&self.suffix);
        s
    }
}

struct Cell {
    dist: Distribution,
    class: ClassSignature,
}

/// Observation table over prefixes `RED ∪ BLUE` and suffixes `Suf`.
///
/// Cells are keyed by the concatenated word `ps`, since `OT[p][s] = MQ(ps)`.
pub struct ObservationTable<'a> {
    model: &'a dyn LanguageModel,
    equivalence: &'a dyn Equivalence,
    red: Vec<Word>,
    blue: Vec<Word>,
    suffixes: Vec<Word>,
    cells: HashMap<Word, Cell>,
}

fn concat(p: &[usize], s: &[usize]) -> Word {
    let mut w = Vec::with_capacity(p.len() + s.len());
    w.extend_from_slice(p);
    w.extend_from_slice(s);
    w
}

impl<'a> ObservationTable<'a> {
    /// `RED = {λ}`, `Suf = {λ}`, `BLUE = Σ`, all cells filled.
    pub fn init(model: &'a dyn LanguageModel, equivalence: &'a dyn Equivalence) -> Result<Self> {
        let mut ot = ObservationTable {
            model,
            equivalence,
            red: vec![vec![]],
            blue: Vec::new(),
            suffixes: vec![vec![]],
            cells: HashMap::new(),
        };
        ot.refresh()?;
        Ok(ot)
    }

    pub fn red(&self) -> &[Word] {
        &self.red
    }

    pub fn blue(&self) -> &[Word] {
        &self.blue
    }

    pub fn suffixes(&self) -> &[Word] {
        &self.suffixes
    }

    pub fn equivalence(&self) -> &dyn Equivalence {
        self.equivalence
    }

    /// Logical cell count `|RED ∪ BLUE| · |Suf|`.
    pub fn num_cells(&self) -> usize {
        (self.red.len() + self.blue.len()) * self.suffixes.len()
    }

    pub fn cell(&self, p: &[usize], s: &[usize]) -> Option<&Distribution> {
        self.cells.get(&concat(p, s)).map(|c| &c.dist)
    }

    pub fn cell_class(&self, p: &[usize], s: &[usize]) -> Option<&ClassSignature> {
        self.cells.get(&concat(p, s)).map(|c| &c.class)
    }

    /// Panics if `p` is not a row of the table.
    pub fn row(&self, p: &[usize]) -> RowSignature {
        RowSignature(
            self.suffixes
                .iter()
                .map(|s| self.cell_class(p, s).expect("row of the table").clone())
                .collect(),
        )
    }

    /// Number of distinct red rows, `#⌊RED⌋`.
    pub fn num_classes(&self) -> usize {
        self.red.iter().map(|p| self.row(p)).collect::<BTreeSet<_>>().len()
    }

    /// `None` when closed, otherwise the length-lex first blue row with no
    /// equal red row.
    pub fn is_closed(&self) -> Option<Word> {
        let red_rows: BTreeSet<RowSignature> = self.red.iter().map(|p| self.row(p)).collect();
        self.blue.iter().find(|p| !red_rows.contains(&self.row(p))).cloned()
    }

    pub fn close_step(&mut self, offender: &[usize]) -> Result<()> {
        if !self.blue.iter().any(|p| p == offender) {
            return Err(Error::TableNotReady("close offender is not a blue row"));
        }
        self.add_red(offender.to_vec());
        self.refresh()
    }

    /// `None` when consistent, otherwise the first witness in length-lex
    /// order of `(p, p', σ, s)`.
    pub fn is_consistent(&self) -> Option<Inconsistency> {
        let rows: Vec<RowSignature> = self.red.iter().map(|p| self.row(p)).collect();
        let k = self.model.alphabet().len();
        for i in 0..self.red.len() {
            for j in i + 1..self.red.len() {
                if rows[i] != rows[j] {
                    continue;
                }
                let (p, p2) = (&self.red[i], &self.red[j]);
                for symbol in 0..k {
                    let (mut ps, mut p2s) = (p.clone(), p2.clone());
                    ps.push(symbol);
                    p2s.push(symbol);
                    for s in &self.suffixes {
                        if self.cell_class(&ps, s) != self.cell_class(&p2s, s) {
                            return Some(Inconsistency {
                                p: p.clone(),
                                p2: p2.clone(),
                                symbol,
                                suffix: s.clone(),
                            });
                        }
                    }
                }
            }
        }
        None
    }

    pub fn consistent_step(&mut self, witness: &Inconsistency) -> Result<()> {
        if !self.suffixes.contains(&witness.suffix) {
            return Err(Error::TableNotReady("witness suffix is not a column"));
        }
        let s = witness.new_suffix();
        if self.suffixes.contains(&s) {
            return Err(Error::TableNotReady("witness column already present"));
        }
        self.suffixes.push(s);
        self.refresh()
    }

    /// Adds every prefix of `v` to `RED`.
    pub fn update_with_counterexample(&mut self, v: &[usize]) -> Result<()> {
        self.model.alphabet().check_word(v)?;
        for end in 0..=v.len() {
            self.add_red(v[..end].to_vec());
        }
        self.refresh()
    }

    /// The hypothesis of a closed and consistent table: one state per red
    /// row class, numbered by first red access word.
    pub fn build_hypothesis(&self) -> Result<QuotientPdfa> {
        if self.is_closed().is_some() {
            return Err(Error::TableNotReady("table is not closed"));
        }
        if self.is_consistent().is_some() {
            return Err(Error::TableNotReady("table is not consistent"));
        }
        let mut index: HashMap<RowSignature, usize> = HashMap::new();
        let mut access: Vec<&Word> = Vec::new();
        for p in &self.red {
            index.entry(self.row(p)).or_insert_with(|| {
                access.push(p);
                access.len() - 1
            });
        }
        let k = self.model.alphabet().len();
        let successors = access
            .iter()
            .map(|p| {
                (0..k)
                    .map(|symbol| {
                        let mut ps = (*p).clone();
                        ps.push(symbol);
                        index[&self.row(&ps)]
                    })
                    .collect()
            })
            .collect();
        let representatives = access
            .iter()
            .map(|p| self.cell(p, &[]).expect("red cell").clone())
            .collect();
        QuotientPdfa::new(
            self.model.alphabet().clone(),
            index[&self.row(&[])],
            successors,
            representatives,
            self.equivalence,
        )
    }

    fn add_red(&mut self, p: Word) {
        if let Err(pos) = self.red.binary_search_by(|q| length_lex(q, &p)) {
            self.red.insert(pos, p);
        }
    }

    /// Recomputes `BLUE = RED·Σ \ RED` and fills missing cells in
    /// deterministic order.
    fn refresh(&mut self) -> Result<()> {
        let k = self.model.alphabet().len();
        let mut blue: Vec<Word> = Vec::new();
        for p in &self.red {
            for symbol in 0..k {
                let mut ps = p.clone();
                ps.push(symbol);
                if self.red.binary_search_by(|q| length_lex(q, &ps)).is_err() {
                    blue.push(ps);
                }
            }
        }
        blue.sort_by(|a, b| length_lex(a, b));
        blue.dedup();
        self.blue = blue;

        let rows: Vec<Word> = self.red.iter().chain(&self.blue).cloned().collect();
        for p in &rows {
            for s in &self.suffixes {
                let w = concat(p, s);
                if self.cells.contains_key(&w) {
                    continue;
                }
                let dist = self.model.query(&w)?;
                let class = self.equivalence.signature(&dist)?;
                self.cells.insert(w, Cell { dist, class });
            }
        }
        Ok(())
    }
}
