//! Disk array layouts and their erasure semantics.
//!
//! A layout places cells on N disks. Each cell is either a data symbol or a
//! parity symbol defined as the GF(2) sum of data symbols; a replica is the
//! degenerate arity-1 parity equal to its source. This uniform view means a
//! single rank computation answers "does this failure set lose data" for
//! mirrored, chained, declustered, and erasure-coded layouts alike.
//!
//! Supported kinds:
//! - `Bm`: M independent mirrored pairs (RAID1/0)
//! - `Nway(w)`: M groups of w-way replicated disks
//! - `Grd`: group rotated declustering; each primary's blocks spread over
//!   all M secondaries (RAID0/1 with rotated secondary strips)
//! - `Id(c)`: interleaved declustering with c clusters; a disk's data is
//!   split across the other disks in its cluster
//! - `Cd`: chained declustering; disk i replicated on disk i+1 mod N
//! - `Lsi`: alternating data/parity ring, parity disk between data disks
//!   i and i+1 holding their XOR
//! - `Sspiral443`: 4 data disks plus the 4 cyclic 3-window XOR parities
//! - `Weaver { t }`: per-disk data plus a t-term parity of rotated neighbors
//! - `Bcode6`: 6-column B-code layout, one data and two parity cells per column
//! - `Raidk(k)`: maximum distance separable code with k parity disks,
//!   built from a Cauchy matrix over GF(16) expanded to bit cells
//! - `Custom`: any explicit cell assignment loaded from text

use crate::exact::binom;
use crate::gf16;
use crate::gf2;
use num_bigint::BigInt;
use std::fmt;
use thiserror::Error;

const ENUM_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LayoutKind {
    Bm,
    Nway(u32),
    Grd,
    Id(u32),
    Cd,
    Lsi,
    Sspiral443,
    Weaver { t: u32 },
    Bcode6,
    Raidk(u32),
    Custom,
}

impl LayoutKind {
    pub fn tag(&self) -> String {
        match self {
            LayoutKind::Bm => "bm".into(),
            LayoutKind::Nway(w) => format!("nway:{w}"),
            LayoutKind::Grd => "grd".into(),
            LayoutKind::Id(c) => format!("id:{c}"),
            LayoutKind::Cd => "cd".into(),
            LayoutKind::Lsi => "lsi".into(),
            LayoutKind::Sspiral443 => "sspiral".into(),
            LayoutKind::Weaver { t } => format!("weaver:{t}"),
            LayoutKind::Bcode6 => "bcode6".into(),
            LayoutKind::Raidk(k) => format!("raidk:{k}"),
            LayoutKind::Custom => "custom".into(),
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LayoutError {
    #[error("invalid layout parameters: {0}")]
    Invalid(String),
    #[error("layout too large for exact machinery: {0}")]
    TooLarge(String),
    #[error("enumeration budget exceeded: C({n},{i}) = {count} subsets > {budget}")]
    BudgetExceeded { n: u32, i: u32, count: BigInt, budget: u64 },
    #[error("failure set references disk {disk} outside 0..{n}")]
    BadFailureSet { disk: u32, n: u32 },
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellRole {
    Data(u32),
    Parity,
}

/// One stored symbol: its location is implicit (disk, slot), its value is a
/// GF(2) combination of data symbols given by `mask`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub mask: u64,
    pub role: CellRole,
}

impl Cell {
    pub fn data(id: u32) -> Cell {
        Cell {
            mask: 1u64 << id,
            role: CellRole::Data(id),
        }
    }

    pub fn parity(mask: u64) -> Cell {
        Cell {
            mask,
            role: CellRole::Parity,
        }
    }
}

/// Set of failed disks, as a bitmask over disk indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct FailureSet(pub u64);

impl FailureSet {
    pub fn from_disks(disks: &[u32]) -> FailureSet {
        let mut m = 0u64;
        for &d in disks {
            m |= 1 << d;
        }
        FailureSet(m)
    }

    pub fn contains(&self, disk: u32) -> bool {
        self.0 >> disk & 1 == 1
    }

    pub fn len(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn disks(&self) -> Vec<u32> {
        (0..64).filter(|&d| self.contains(d)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellLoc {
    pub disk: u32,
    pub slot: u32,
}

impl fmt::Display for CellLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "disk{}.c{}", self.disk, self.slot)
    }
}

/// A parity equation: the cell at `parity` equals the XOR of `data` symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityEquation {
    pub parity: CellLoc,
    pub data: Vec<u32>,
}

/// One XOR step of a rebuild: read `sources`, XOR them, write the result,
/// which equals the combination `value_mask` of original data symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryStep {
    pub target: CellLoc,
    pub value_mask: u64,
    pub sources: Vec<CellLoc>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryPlan {
    pub steps: Vec<RecoveryStep>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum RecoveryError {
    #[error("data symbols {0:?} are unrecoverable under this failure set")]
    Unrecoverable(Vec<u32>),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub kind: LayoutKind,
    pub n: u32,
    pub data_count: u32,
    pub disks: Vec<Vec<Cell>>,
}

impl Layout {
    pub fn build(kind: LayoutKind, n: u32) -> Result<Layout, LayoutError> {
        let disks = match &kind {
            LayoutKind::Bm => build_nway(n, 2)?,
            LayoutKind::Nway(w) => build_nway(n, *w)?,
            LayoutKind::Grd => build_grd(n)?,
            LayoutKind::Id(c) => build_id(n, *c)?,
            LayoutKind::Cd => build_cd(n)?,
            LayoutKind::Lsi => build_lsi(n)?,
            LayoutKind::Sspiral443 => build_sspiral(n)?,
            LayoutKind::Weaver { t } => build_weaver(n, *t)?,
            LayoutKind::Bcode6 => build_bcode6(n)?,
            LayoutKind::Raidk(k) => build_raidk(n, *k)?,
            LayoutKind::Custom => {
                return Err(LayoutError::Invalid(
                    "custom layouts are built from a text document".into(),
                ))
            }
        };
        Layout::from_disks(kind, n, disks)
    }

    fn from_disks(kind: LayoutKind, n: u32, disks: Vec<Vec<Cell>>) -> Result<Layout, LayoutError> {
        assert_eq!(disks.len(), n as usize);
        let mut data_seen = 0u64;
        let mut cells_total = 0usize;
        for dcells in &disks {
            cells_total += dcells.len();
            for c in dcells {
                if c.mask == 0 {
                    return Err(LayoutError::Invalid("empty parity equation".into()));
                }
                if let CellRole::Data(id) = c.role {
                    if c.mask != 1u64 << id {
                        return Err(LayoutError::Invalid(format!(
                            "data cell d{id} carries mask {:#x}",
                            c.mask
                        )));
                    }
                    if data_seen >> id & 1 == 1 {
                        return Err(LayoutError::Invalid(format!("data symbol d{id} placed twice")));
                    }
                    data_seen |= 1 << id;
                }
            }
        }
        let data_count = data_seen.count_ones();
        if data_count == 0 {
            return Err(LayoutError::Invalid("layout holds no data".into()));
        }
        if data_seen != (if data_count == 64 { u64::MAX } else { (1u64 << data_count) - 1 }) {
            return Err(LayoutError::Invalid("data symbol ids are not contiguous".into()));
        }
        if cells_total > 128 {
            return Err(LayoutError::TooLarge(format!("{cells_total} cells > 128")));
        }
        // every parity mask must reference existing data only
        for dcells in &disks {
            for c in dcells {
                if c.mask & !data_seen != 0 {
                    return Err(LayoutError::Invalid("parity references unknown data".into()));
                }
            }
        }
        Ok(Layout {
            kind,
            n,
            data_count,
            disks,
        })
    }

    pub fn cell(&self, loc: CellLoc) -> Cell {
        self.disks[loc.disk as usize][loc.slot as usize]
    }

    pub fn equations(&self) -> Vec<ParityEquation> {
        let mut out = Vec::new();
        for (d, dcells) in self.disks.iter().enumerate() {
            for (s, c) in dcells.iter().enumerate() {
                if let CellRole::Parity = c.role {
                    out.push(ParityEquation {
                        parity: CellLoc {
                            disk: d as u32,
                            slot: s as u32,
                        },
                        data: (0..64).filter(|&b| c.mask >> b & 1 == 1).collect(),
                    });
                }
            }
        }
        out
    }

    fn check_failure_set(&self, f: FailureSet) -> Result<(), LayoutError> {
        let valid = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        if f.0 & !valid != 0 {
            let disk = (f.0 & !valid).trailing_zeros();
            return Err(LayoutError::BadFailureSet { disk, n: self.n });
        }
        Ok(())
    }

    fn surviving_masks(&self, f: FailureSet) -> Vec<u64> {
        let mut rows = Vec::with_capacity(self.disks.iter().map(Vec::len).sum());
        for (d, dcells) in self.disks.iter().enumerate() {
            if !f.contains(d as u32) {
                rows.extend(dcells.iter().map(|c| c.mask));
            }
        }
        rows
    }

    /// True when every data symbol is still in the GF(2) span of the cells
    /// on surviving disks.
    pub fn survives(&self, f: FailureSet) -> Result<bool, LayoutError> {
        self.check_failure_set(f)?;
        Ok(gf2::rank(&self.surviving_masks(f)) == self.data_count)
    }

    /// Ordered XOR steps reconstructing every lost cell from surviving ones.
    ///
    /// Lost data symbols come first, each expressed over surviving cells;
    /// lost parity cells follow, recomputed from their defining data symbols
    /// (available once the data steps ran).
    pub fn recovery_plan(&self, f: FailureSet) -> Result<RecoveryPlan, RecoveryError> {
        self.check_failure_set(f)?;
        let mut surv_locs = Vec::new();
        let mut surv_masks = Vec::new();
        let mut lost_data: Vec<(CellLoc, u32)> = Vec::new();
        let mut lost_parity: Vec<(CellLoc, u64)> = Vec::new();
        for (d, dcells) in self.disks.iter().enumerate() {
            for (s, c) in dcells.iter().enumerate() {
                let loc = CellLoc {
                    disk: d as u32,
                    slot: s as u32,
                };
                if f.contains(d as u32) {
                    match c.role {
                        CellRole::Data(id) => lost_data.push((loc, id)),
                        CellRole::Parity => lost_parity.push((loc, c.mask)),
                    }
                } else {
                    surv_locs.push(loc);
                    surv_masks.push(c.mask);
                }
            }
        }
        let targets: Vec<u64> = lost_data.iter().map(|&(_, id)| 1u64 << id).collect();
        let combos = gf2::express(&surv_masks, &targets);
        let unrecoverable: Vec<u32> = lost_data
            .iter()
            .zip(&combos)
            .filter(|(_, c)| c.is_none())
            .map(|(&(_, id), _)| id)
            .collect();
        if !unrecoverable.is_empty() {
            return Err(RecoveryError::Unrecoverable(unrecoverable));
        }
        let mut steps = Vec::new();
        let mut data_home: Vec<CellLoc> = vec![CellLoc { disk: 0, slot: 0 }; self.data_count as usize];
        for (d, dcells) in self.disks.iter().enumerate() {
            for (s, c) in dcells.iter().enumerate() {
                if let CellRole::Data(id) = c.role {
                    data_home[id as usize] = CellLoc {
                        disk: d as u32,
                        slot: s as u32,
                    };
                }
            }
        }
        for ((loc, id), combo) in lost_data.iter().zip(&combos) {
            let combo = combo.unwrap();
            let sources: Vec<CellLoc> = (0..surv_locs.len())
                .filter(|&i| combo >> i & 1 == 1)
                .map(|i| surv_locs[i])
                .collect();
            steps.push(RecoveryStep {
                target: *loc,
                value_mask: 1u64 << id,
                sources,
            });
        }
        for (loc, mask) in lost_parity {
            let sources: Vec<CellLoc> = (0..64)
                .filter(|&b| mask >> b & 1 == 1)
                .map(|b| data_home[b as usize])
                .collect();
            steps.push(RecoveryStep {
                target: loc,
                value_mask: mask,
                sources,
            });
        }
        Ok(RecoveryPlan { steps })
    }

    /// Largest i for which some i-subset could still be survivable, from
    /// counting cells alone. Used to cut enumeration.
    pub fn max_survivable_bound(&self) -> u32 {
        let max_cells = self.disks.iter().map(Vec::len).max().unwrap_or(0) as u32;
        if max_cells == 0 {
            return 0;
        }
        let need = self.data_count.div_ceil(max_cells);
        self.n.saturating_sub(need)
    }

    /// Number of i-disk failure sets that do not lose data, by enumeration.
    pub fn count_survivable(&self, i: u32) -> Result<BigInt, LayoutError> {
        if i > self.n {
            return Ok(BigInt::from(0));
        }
        let total = binom(self.n as u64, i as u64);
        if total > BigInt::from(ENUM_BUDGET) {
            return Err(LayoutError::BudgetExceeded {
                n: self.n,
                i,
                count: total,
                budget: ENUM_BUDGET,
            });
        }
        if i > self.max_survivable_bound() {
            return Ok(BigInt::from(0));
        }
        if i == 0 {
            return Ok(BigInt::from(1));
        }
        // Gosper's hack over i-subsets of n bits.
        let mut count = 0u64;
        let mut set: u64 = (1u64 << i) - 1;
        let limit: u64 = if self.n == 64 { u64::MAX } else { 1u64 << self.n };
        while set < limit {
            if self.survives(FailureSet(set))? {
                count += 1;
            }
            let c = set & set.wrapping_neg();
            let r = set + c;
            if r >= limit || r == 0 {
                break;
            }
            set = (((r ^ set) >> 2) / c) | r;
        }
        Ok(BigInt::from(count))
    }
}

fn build_nway(n: u32, w: u32) -> Result<Vec<Vec<Cell>>, LayoutError> {
    if w < 2 || n == 0 || n % w != 0 {
        return Err(LayoutError::Invalid(format!(
            "replication needs w >= 2 dividing n (n={n}, w={w})"
        )));
    }
    let m = n / w;
    if m > 64 {
        return Err(LayoutError::TooLarge(format!("{m} data symbols > 64")));
    }
    let mut disks = vec![Vec::new(); n as usize];
    for g in 0..m {
        disks[(g * w) as usize].push(Cell::data(g));
        for r in 1..w {
            disks[(g * w + r) as usize].push(Cell::parity(1u64 << g));
        }
    }
    Ok(disks)
}

fn build_grd(n: u32) -> Result<Vec<Vec<Cell>>, LayoutError> {
    if n < 4 || n % 2 != 0 {
        return Err(LayoutError::Invalid(format!("grd needs even n >= 4 (n={n})")));
    }
    let m = n / 2;
    if m * m > 64 {
        return Err(LayoutError::TooLarge(format!("{} data symbols > 64", m * m)));
    }
    let mut disks = vec![Vec::new(); n as usize];
    // primary p holds blocks (p, r) for rows r; row r of the secondary side
    // is rotated by r, so block (p, r) is replicated on secondary (p+r) mod M
    for p in 0..m {
        for r in 0..m {
            disks[p as usize].push(Cell::data(p * m + r));
        }
    }
    for s in 0..m {
        for p in 0..m {
            let r = (s + m - p) % m;
            disks[(m + s) as usize].push(Cell::parity(1u64 << (p * m + r)));
        }
    }
    Ok(disks)
}

fn build_id(n: u32, c: u32) -> Result<Vec<Vec<Cell>>, LayoutError> {
    if c == 0 || n % c != 0 || n / c < 2 {
        return Err(LayoutError::Invalid(format!(
            "id needs clusters of >= 2 disks (n={n}, c={c})"
        )));
    }
    let w = n / c;
    let data_count = n * (w - 1);
    if data_count > 64 {
        return Err(LayoutError::TooLarge(format!("{data_count} data symbols > 64")));
    }
    let mut disks = vec![Vec::new(); n as usize];
    let mut next_id = 0u32;
    for g in 0..c {
        let base = g * w;
        for k in 0..w {
            // disk base+k's primary data, one part per other cluster disk
            for j in 0..w {
                if j == k {
                    continue;
                }
                let id = next_id;
                next_id += 1;
                disks[(base + k) as usize].push(Cell::data(id));
                disks[(base + j) as usize].push(Cell::parity(1u64 << id));
            }
        }
    }
    Ok(disks)
}

fn build_cd(n: u32) -> Result<Vec<Vec<Cell>>, LayoutError> {
    if n < 3 {
        return Err(LayoutError::Invalid(format!("cd needs n >= 3 (n={n})")));
    }
    if n > 64 {
        return Err(LayoutError::TooLarge(format!("{n} data symbols > 64")));
    }
    let mut disks = vec![Vec::new(); n as usize];
    for i in 0..n {
        disks[i as usize].push(Cell::data(i));
        disks[((i + 1) % n) as usize].push(Cell::parity(1u64 << i));
    }
    Ok(disks)
}

fn build_lsi(n: u32) -> Result<Vec<Vec<Cell>>, LayoutError> {
    if n < 4 || n % 2 != 0 {
        return Err(LayoutError::Invalid(format!("lsi needs even n >= 4 (n={n})")));
    }
    let m = n / 2;
    let mut disks = vec![Vec::new(); n as usize];
    for i in 0..m {
        disks[(2 * i) as usize].push(Cell::data(i));
        let j = (i + 1) % m;
        disks[(2 * i + 1) as usize].push(Cell::parity(1u64 << i | 1u64 << j));
    }
    Ok(disks)
}

fn build_sspiral(n: u32) -> Result<Vec<Vec<Cell>>, LayoutError> {
    if n != 8 {
        return Err(LayoutError::Invalid(format!("sspiral is the 4+4 layout, n must be 8 (n={n})")));
    }
    let mut disks = vec![Vec::new(); 8];
    for i in 0..4u32 {
        disks[i as usize].push(Cell::data(i));
    }
    // cyclic 3-windows over d0..d3
    for i in 0..4u32 {
        let mask = (0..3).fold(0u64, |m, j| m | 1 << ((i + j) % 4));
        disks[(4 + i) as usize].push(Cell::parity(mask));
    }
    Ok(disks)
}

fn build_weaver(n: u32, t: u32) -> Result<Vec<Vec<Cell>>, LayoutError> {
    let offsets: &[u32] = match t {
        2 => &[1, 2],
        // the {1, 2, 4} stencil keeps every 3-failure recoverable at n = 8
        3 => &[1, 2, 4],
        _ => {
            return Err(LayoutError::Invalid(format!(
                "weaver supports parity in-degree t of 2 or 3 (t={t})"
            )))
        }
    };
    let min_n = offsets.iter().max().unwrap() + 1;
    if n < min_n {
        return Err(LayoutError::Invalid(format!("weaver t={t} needs n >= {min_n} (n={n})")));
    }
    if n > 64 {
        return Err(LayoutError::TooLarge(format!("{n} data symbols > 64")));
    }
    let mut disks = vec![Vec::new(); n as usize];
    for i in 0..n {
        disks[i as usize].push(Cell::data(i));
        let mask = offsets.iter().fold(0u64, |m, &o| m | 1 << ((i + o) % n));
        disks[i as usize].push(Cell::parity(mask));
    }
    Ok(disks)
}

fn build_bcode6(n: u32) -> Result<Vec<Vec<Cell>>, LayoutError> {
    if n != 6 {
        return Err(LayoutError::Invalid(format!("bcode6 is fixed at 6 columns (n={n})")));
    }
    let mut disks = vec![Vec::new(); 6];
    for i in 0..6u32 {
        disks[i as usize].push(Cell::data(i));
        disks[i as usize].push(Cell::parity(1 << ((i + 1) % 6) | 1 << ((i + 2) % 6)));
        disks[i as usize].push(Cell::parity(1 << ((i + 3) % 6) | 1 << ((i + 5) % 6)));
    }
    Ok(disks)
}

fn build_raidk(n: u32, k: u32) -> Result<Vec<Vec<Cell>>, LayoutError> {
    if k == 0 || k >= n {
        return Err(LayoutError::Invalid(format!("raidk needs 1 <= k < n (n={n}, k={k})")));
    }
    if n > 16 {
        return Err(LayoutError::TooLarge(format!(
            "raidk Cauchy construction over GF(16) supports n <= 16 (n={n})"
        )));
    }
    let m = n - k;
    let mut disks = vec![Vec::new(); n as usize];
    for i in 0..m {
        for b in 0..4 {
            disks[i as usize].push(Cell::data(4 * i + b));
        }
    }
    // Cauchy coefficients c[j][i] = 1/(x_j + y_i) with x_j = j, y_i = k+i;
    // all points distinct in GF(16), so every square minor is nonsingular
    // and the code is MDS at the disk level.
    for j in 0..k {
        let mut rows_mask = [0u64; 4];
        for i in 0..m {
            let coeff = gf16::inv(gf16::add(j as u8, (k + i) as u8));
            let bitmat = gf16::mul_bit_matrix(coeff);
            for b in 0..4 {
                for a in 0..4u32 {
                    if bitmat[b] >> a & 1 == 1 {
                        rows_mask[b] |= 1u64 << (4 * i + a);
                    }
                }
            }
        }
        for b in 0..4 {
            disks[(m + j) as usize].push(Cell::parity(rows_mask[b]));
        }
    }
    Ok(disks)
}

// ---- text serialization ----

impl Layout {
    /// Structured text document: header with kind and n, then one line per
    /// disk listing its cells. Data cells print as `d<i>`, parity cells as
    /// `p:` followed by their data terms.
    pub fn to_text(&self) -> String {
        let mut out = format!("layout {} n={}\n", self.kind.tag(), self.n);
        for (d, dcells) in self.disks.iter().enumerate() {
            let cells: Vec<String> = dcells
                .iter()
                .map(|c| match c.role {
                    CellRole::Data(id) => format!("d{id}"),
                    CellRole::Parity => {
                        let terms: Vec<String> = (0..64)
                            .filter(|&b| c.mask >> b & 1 == 1)
                            .map(|b| format!("d{b}"))
                            .collect();
                        format!("p:{}", terms.join("+"))
                    }
                })
                .collect();
            out.push_str(&format!("disk {d}: {}\n", cells.join(" ")));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Layout, LayoutError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| LayoutError::Parse("empty document".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("layout") {
            return Err(LayoutError::Parse("expected `layout <kind> n=<n>`".into()));
        }
        let tag = parts
            .next()
            .ok_or_else(|| LayoutError::Parse("missing layout kind".into()))?;
        let mut n: Option<u32> = None;
        for p in parts {
            match p.split_once('=') {
                Some(("n", v)) => {
                    n = Some(v.parse().map_err(|_| LayoutError::Parse(format!("bad n: {v}")))?)
                }
                _ => return Err(LayoutError::Parse(format!("unknown header field {p:?}"))),
            }
        }
        let n = n.ok_or_else(|| LayoutError::Parse("missing n=<disks>".into()))?;
        let kind = parse_kind_tag(tag)?;

        let mut disks: Vec<Vec<Cell>> = vec![Vec::new(); n as usize];
        for line in lines {
            let (head, rest) = line
                .split_once(':')
                .ok_or_else(|| LayoutError::Parse(format!("bad disk line {line:?}")))?;
            let d: u32 = head
                .trim()
                .strip_prefix("disk")
                .map(str::trim)
                .ok_or_else(|| LayoutError::Parse(format!("bad disk line {line:?}")))?
                .parse()
                .map_err(|_| LayoutError::Parse(format!("bad disk index in {line:?}")))?;
            if d >= n {
                return Err(LayoutError::Parse(format!("disk {d} out of range")));
            }
            for tok in rest.split_whitespace() {
                disks[d as usize].push(parse_cell(tok)?);
            }
        }
        let parsed = Layout::from_disks(kind.clone(), n, disks)?;
        if kind != LayoutKind::Custom {
            // reject documents that drifted from their declared kind
            let rebuilt = Layout::build(kind, n)?;
            if rebuilt.disks != parsed.disks {
                return Err(LayoutError::Parse(
                    "cell assignment does not match the declared layout kind".into(),
                ));
            }
        }
        Ok(parsed)
    }
}

fn parse_cell(tok: &str) -> Result<Cell, LayoutError> {
    if let Some(expr) = tok.strip_prefix("p:") {
        let mut mask = 0u64;
        for term in expr.split('+') {
            let id: u32 = term
                .strip_prefix('d')
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| LayoutError::Parse(format!("bad parity term {term:?}")))?;
            if id >= 64 {
                return Err(LayoutError::Parse(format!("data id {id} too large")));
            }
            mask |= 1 << id;
        }
        Ok(Cell::parity(mask))
    } else if let Some(v) = tok.strip_prefix('d') {
        let id: u32 = v
            .parse()
            .map_err(|_| LayoutError::Parse(format!("bad data cell {tok:?}")))?;
        if id >= 64 {
            return Err(LayoutError::Parse(format!("data id {id} too large")));
        }
        Ok(Cell::data(id))
    } else {
        Err(LayoutError::Parse(format!("bad cell token {tok:?}")))
    }
}

pub fn parse_kind_tag(tag: &str) -> Result<LayoutKind, LayoutError> {
    let (name, arg) = match tag.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (tag, None),
    };
    let num = |a: Option<&str>| -> Result<u32, LayoutError> {
        a.and_then(|v| v.parse().ok())
            .ok_or_else(|| LayoutError::Parse(format!("kind {tag:?} needs a numeric argument")))
    };
    match name {
        "bm" => Ok(LayoutKind::Bm),
        "nway" => Ok(LayoutKind::Nway(num(arg)?)),
        "grd" => Ok(LayoutKind::Grd),
        "id" => Ok(LayoutKind::Id(num(arg)?)),
        "cd" => Ok(LayoutKind::Cd),
        "lsi" => Ok(LayoutKind::Lsi),
        "sspiral" => Ok(LayoutKind::Sspiral443),
        "weaver" => Ok(LayoutKind::Weaver { t: num(arg)? }),
        "bcode6" => Ok(LayoutKind::Bcode6),
        "raidk" => Ok(LayoutKind::Raidk(num(arg)?)),
        "custom" => Ok(LayoutKind::Custom),
        _ => Err(LayoutError::Parse(format!("unknown layout kind {tag:?}"))),
    }
}
