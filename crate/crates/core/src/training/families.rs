use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Loss components that carry one adaptive weight each in group mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Pde,
    Ic,
    Bc,
    Int,
}

impl Group {
    pub const ALL: [Group; 4] = [Group::Pde, Group::Ic, Group::Bc, Group::Int];

    pub fn name(self) -> &'static str {
        match self {
            Group::Pde => "pde",
            Group::Ic => "ic",
            Group::Bc => "bc",
            Group::Int => "int",
        }
    }
}

/// One residual family: a mean of squared residuals over its own points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Ge1,
    Ge2,
    Ge3,
    Ge4,
    Ge5,
    Ge6,
    /// `T_s* − 1` on liquid-classified PCM points.
    Liquid,
    Ic1,
    Ic2,
    Ic3,
    Bc1,
    Bc2,
    Bc3,
    Bc4,
    Bc5,
    Bc6,
    Bc7,
    Bc8,
    Bc9,
    /// `k_s ∂T_s*/∂y* − k_f ∂T_f*/∂y*` on the fin surface, off by default.
    FluxContinuity,
}

impl Family {
    pub const COUNT: usize = 20;

    pub const ALL: [Family; Family::COUNT] = [
        Family::Ge1,
        Family::Ge2,
        Family::Ge3,
        Family::Ge4,
        Family::Ge5,
        Family::Ge6,
        Family::Liquid,
        Family::Ic1,
        Family::Ic2,
        Family::Ic3,
        Family::Bc1,
        Family::Bc2,
        Family::Bc3,
        Family::Bc4,
        Family::Bc5,
        Family::Bc6,
        Family::Bc7,
        Family::Bc8,
        Family::Bc9,
        Family::FluxContinuity,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Ge1 => "ge1",
            Family::Ge2 => "ge2",
            Family::Ge3 => "ge3",
            Family::Ge4 => "ge4",
            Family::Ge5 => "ge5",
            Family::Ge6 => "ge6",
            Family::Liquid => "liquid",
            Family::Ic1 => "ic1",
            Family::Ic2 => "ic2",
            Family::Ic3 => "ic3",
            Family::Bc1 => "bc1",
            Family::Bc2 => "bc2",
            Family::Bc3 => "bc3",
            Family::Bc4 => "bc4",
            Family::Bc5 => "bc5",
            Family::Bc6 => "bc6",
            Family::Bc7 => "bc7",
            Family::Bc8 => "bc8",
            Family::Bc9 => "bc9",
            Family::FluxContinuity => "flux_continuity",
        }
    }

    pub fn group(self) -> Group {
        use Family::*;
        match self {
            Ge1 | Ge2 | Ge3 | Ge4 | Ge5 | Ge6 | Liquid => Group::Pde,
            Ic1 | Ic2 | Ic3 => Group::Ic,
            Bc1 | Bc2 | Bc3 | Bc4 | Bc5 | Bc6 | Bc7 | FluxContinuity => Group::Bc,
            Bc8 | Bc9 => Group::Int,
        }
    }
}

/// Per-family mean-squared residuals and the point count behind each.
#[derive(Clone, Debug, PartialEq)]
pub struct LossBreakdown {
    pub values: [f64; Family::COUNT],
    pub counts: [usize; Family::COUNT],
}

impl Default for LossBreakdown {
    fn default() -> Self {
        LossBreakdown { values: [0.0; Family::COUNT], counts: [0; Family::COUNT] }
    }
}

impl LossBreakdown {
    pub fn get(&self, family: Family) -> f64 {
        self.values[family.index()]
    }

    pub fn count(&self, family: Family) -> usize {
        self.counts[family.index()]
    }

    pub fn group(&self, group: Group) -> f64 {
        Family::ALL.iter().filter(|f| f.group() == group).map(|f| self.get(*f)).sum()
    }

    /// `[L_pde, L_ic, L_bc, L_int]`.
    pub fn groups(&self) -> [f64; 4] {
        Group::ALL.map(|g| self.group(g))
    }

    /// Unweighted sum over all families.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn first_non_finite(&self) -> Option<Family> {
        Family::ALL.into_iter().find(|f| !self.get(*f).is_finite())
    }

    pub fn family_map(&self) -> BTreeMap<String, f64> {
        Family::ALL.iter().map(|f| (f.name().to_string(), self.get(*f))).collect()
    }

    pub fn group_map(&self) -> BTreeMap<String, f64> {
        Group::ALL.iter().map(|g| (g.name().to_string(), self.group(*g))).collect()
    }
}
