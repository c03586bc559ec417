//! Charger port types and the system-wide port catalog.

use core::fmt;
use serde::{Deserialize, Serialize};

/// Number of charger classes.
pub const PORT_TYPE_COUNT: usize = 10;

/// Rated power (kW) for port types 1..=10.
pub const PORT_POWER_KW: [f64; PORT_TYPE_COUNT] =
    [7.0, 11.0, 22.0, 30.0, 60.0, 80.0, 120.0, 150.0, 180.0, 250.0];

/// Observed number of ports of each type across the existing network.
pub const PORT_FREQUENCY: [u32; PORT_TYPE_COUNT] = [2, 20, 8, 6, 18, 11, 4, 4, 10, 1];

/// A charger class, 1-based (1 = 7 kW ... 10 = 250 kW).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct PortType(u8);

impl PortType {
    pub const MIN: PortType = PortType(1);
    pub const MAX: PortType = PortType(PORT_TYPE_COUNT as u8);

    pub fn new(j: u8) -> Option<Self> {
        (1..=PORT_TYPE_COUNT as u8).contains(&j).then_some(PortType(j))
    }

    /// From a 0-based network output index.
    pub fn from_index(i: usize) -> Option<Self> {
        if i < PORT_TYPE_COUNT {
            Some(PortType(i as u8 + 1))
        } else {
            None
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn power_kw(self) -> f64 {
        PORT_POWER_KW[self.index()]
    }

    pub fn all() -> impl Iterator<Item = PortType> {
        (1..=PORT_TYPE_COUNT as u8).map(PortType)
    }
}

impl TryFrom<u8> for PortType {
    type Error = InvalidPortType;

    fn try_from(j: u8) -> Result<Self, Self::Error> {
        PortType::new(j).ok_or(InvalidPortType(j))
    }
}

impl From<PortType> for u8 {
    fn from(p: PortType) -> u8 {
        p.0
    }
}

impl fmt::Display for PortType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("port type {0} is outside 1..=10")]
pub struct InvalidPortType(pub u8);

/// Power, frequency and sizing scale per port type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortCatalog {
    pub power_kw: [f64; PORT_TYPE_COUNT],
    pub frequency: [u32; PORT_TYPE_COUNT],
    /// Sizing scale s_j used by the sizing index, 0.1 for type 1 up to 1.0.
    pub scale: [f64; PORT_TYPE_COUNT],
}

impl Default for PortCatalog {
    fn default() -> Self {
        let mut scale = [0.0; PORT_TYPE_COUNT];
        for (j, s) in scale.iter_mut().enumerate() {
            *s = (j as f64 + 1.0) / 10.0;
        }
        PortCatalog {
            power_kw: PORT_POWER_KW,
            frequency: PORT_FREQUENCY,
            scale,
        }
    }
}

impl PortCatalog {
    pub fn total_frequency(&self) -> u32 {
        self.frequency.iter().sum()
    }

    pub fn power(&self, port: PortType) -> f64 {
        self.power_kw[port.index()]
    }

    pub fn scale(&self, port: PortType) -> f64 {
        self.scale[port.index()]
    }

    /// Frequency weights as `f64`, indexed by `PortType::index`.
    pub fn frequency_weights(&self) -> [f64; PORT_TYPE_COUNT] {
        let mut w = [0.0; PORT_TYPE_COUNT];
        for (o, f) in w.iter_mut().zip(self.frequency.iter()) {
            *o = *f as f64;
        }
        w
    }

    pub fn max_power(&self) -> f64 {
        self.power_kw.iter().copied().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_matches_port_table() {
        let c = PortCatalog::default();
        assert_eq!(c.total_frequency(), 84);
        assert!(c.power_kw.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(c.scale(PortType::new(1).unwrap()), 0.1);
        assert_eq!(c.scale(PortType::new(10).unwrap()), 1.0);
        assert_eq!(PortType::new(8).unwrap().power_kw(), 150.0);
    }

    #[test]
    fn port_type_bounds() {
        assert!(PortType::new(0).is_none());
        assert!(PortType::new(11).is_none());
        assert_eq!(PortType::from_index(9), PortType::new(10));
    }
}
