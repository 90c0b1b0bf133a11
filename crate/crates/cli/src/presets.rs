//! Named figure presets. Every parameter the figures leave open, grid
//! extent and resolution included, is pinned here.

use std::f64::consts::FRAC_PI_4;

use coherent2d::C64;

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum PresetState {
    Su2 { nu: usize },
    /// `terms: None` selects the default Poisson tail rule.
    Schrodinger { psi: C64, terms: Option<usize> },
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub state: PresetState,
    pub alpha: C64,
    pub beta: C64,
    pub p: u32,
    pub q: u32,
    pub grid: &'static str,
}

const S3_2: f64 = 0.866_025_403_784_438_6;

pub const PRESET_NAMES: [&str; 10] = [
    "fig1-left",
    "fig1-right",
    "fig2-left",
    "fig2-right",
    "fig3-left",
    "fig3-right",
    "fig5-left",
    "fig5-right",
    "fig6-left",
    "fig6-right",
];

pub fn preset(name: &str) -> Option<Preset> {
    let tilted = C64::new(0.0, S3_2);
    let real = C64::new(S3_2, 0.0);
    let half = C64::new(0.5, 0.0);
    let su2 = PresetState::Su2 { nu: 40 };
    let thirty = |psi: C64| PresetState::Schrodinger { psi, terms: Some(30) };
    let p = |name, state, alpha, p, q, grid| Preset { name, state, alpha, beta: half, p, q, grid };
    Some(match name {
        "fig1-left" => p("fig1-left", su2, tilted, 1, 1, "-12:12:241,-12:12:241"),
        "fig1-right" => p("fig1-right", su2, real, 1, 1, "-12:12:241,-12:12:241"),
        "fig2-left" => p(
            "fig2-left",
            PresetState::Schrodinger { psi: C64::new(8.0, 0.0), terms: None },
            tilted,
            1,
            1,
            "-12:12:241,-12:12:241",
        ),
        "fig2-right" => p(
            "fig2-right",
            PresetState::Schrodinger { psi: C64::from_polar(8.0, FRAC_PI_4), terms: None },
            tilted,
            1,
            1,
            "-12:12:241,-12:12:241",
        ),
        "fig3-left" => p("fig3-left", su2, tilted, 2, 1, "-16:16:321,-16:16:321"),
        "fig3-right" => p("fig3-right", su2, real, 2, 1, "-16:16:321,-16:16:321"),
        "fig5-left" => p("fig5-left", thirty(C64::new(8.0, 0.0)), tilted, 2, 1, "-16:16:321,-16:16:321"),
        "fig5-right" => p("fig5-right", thirty(C64::new(0.0, 8.0)), tilted, 2, 1, "-16:16:321,-16:16:321"),
        "fig6-left" => p("fig6-left", thirty(C64::new(4.0, 0.0)), tilted, 2, 1, "-12:12:241,-12:12:241"),
        "fig6-right" => p("fig6-right", thirty(C64::new(0.0, 4.0)), tilted, 2, 1, "-12:12:241,-12:12:241"),
        _ => return None,
    })
}
