//! Named parameter sets for the seven reference surfaces.

use crate::domain::DomainSpec;
use crate::verify::Target;

pub const DEFAULT_RESOLUTION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PresetSource {
    Pair { f: &'static str, g: &'static str },
    Rotational { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub source: PresetSource,
    pub domain: &'static str,
}

pub const PRESETS: [Preset; 7] = [
    Preset { name: "fig1", source: PresetSource::Pair { f: "z", g: "z" }, domain: "rect:-1,1,-1,1" },
    Preset { name: "fig2", source: PresetSource::Pair { f: "z^2", g: "z" }, domain: "rect:-1,1,-1,1" },
    Preset { name: "fig3", source: PresetSource::Pair { f: "z", g: "z^3" }, domain: "annulus:0.4,1.5" },
    Preset { name: "fig4", source: PresetSource::Pair { f: "z", g: "z^4" }, domain: "annulus:0.4,1.5" },
    Preset {
        name: "fig5",
        source: PresetSource::Rotational { a: 1.0, b: 0.0 },
        domain: "rect:-1.5,1.5,0,tau,periodic",
    },
    Preset {
        name: "fig6",
        source: PresetSource::Rotational { a: 0.0, b: 0.0 },
        domain: "rect:-1.5,1.5,0,tau,periodic",
    },
    Preset {
        name: "fig7",
        source: PresetSource::Rotational { a: -1.0, b: 1.0 },
        domain: "rect:-1.5,1.5,0,tau,periodic",
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

impl Preset {
    pub fn target(&self) -> Target {
        match self.source {
            PresetSource::Pair { f, g } => Target::Pair { f: f.into(), g: g.into() },
            PresetSource::Rotational { a, b } => Target::Rotational { a, b },
        }
    }

    pub fn domain(&self, n: usize) -> DomainSpec {
        DomainSpec::parse(self.domain, [n, n]).expect("preset domains are valid")
    }

    pub fn describe(&self) -> String {
        match self.source {
            PresetSource::Pair { f, g } => format!("{}  f={f}  g={g}  domain={}", self.name, self.domain),
            PresetSource::Rotational { a, b } => {
                format!("{}  rotational a={a} b={b}  domain={}", self.name, self.domain)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_well_formed() {
        for p in &PRESETS {
            assert!(p.target().surface().is_ok(), "{}", p.name);
            assert_eq!(p.domain(DEFAULT_RESOLUTION).len(), 64 * 64);
        }
        assert!(find("fig3").is_some());
        assert!(find("fig8").is_none());
    }
}
