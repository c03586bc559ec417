use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;

use crate::geo::{Point, StationSite};
use crate::math;
use crate::ports::PortType;

#[derive(Debug, Clone, PartialEq)]
pub struct Port {
    pub port_type: PortType,
    pub power_kw: f64,
    pub occupant: Option<usize>,
}

impl Port {
    pub fn is_free(&self) -> bool {
        self.occupant.is_none()
    }
}

/// Outcome of a vehicle reaching a station.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrivalOutcome {
    /// Plugged into this port index.
    Charging(usize),
    Enqueued,
    Rejected,
}

/// A station during a simulation run: typed ports and a bounded FIFO queue.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargingStation {
    pub id: String,
    pub location: Point,
    pub ports: Vec<Port>,
    pub queue: VecDeque<usize>,
    pub queue_capacity: usize,
}

impl ChargingStation {
    /// Expands the site's port groups in listed order. The queue holds
    /// `ceil(queue_factor * ports)` vehicles.
    pub fn from_site(site: &StationSite, queue_factor: f64) -> Self {
        let mut ports = Vec::new();
        for g in &site.ports {
            for _ in 0..g.count {
                ports.push(Port {
                    port_type: g.port_type,
                    power_kw: g.port_type.power_kw(),
                    occupant: None,
                });
            }
        }
        let queue_capacity = math::ceil(queue_factor * ports.len() as f64) as usize;
        ChargingStation {
            id: site.id.clone(),
            location: site.location(),
            ports,
            queue: VecDeque::new(),
            queue_capacity,
        }
    }

    /// The free port with the highest power, lowest index on ties.
    pub fn best_free_port(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, p) in self.ports.iter().enumerate() {
            if !p.is_free() {
                continue;
            }
            match best {
                Some(b) if self.ports[b].power_kw >= p.power_kw => {}
                _ => best = Some(i),
            }
        }
        best
    }

    /// First-come-first-served admission: fastest free port, else the tail
    /// of the queue, else rejection.
    pub fn admit(&mut self, vehicle: usize) -> ArrivalOutcome {
        if let Some(i) = self.best_free_port() {
            self.ports[i].occupant = Some(vehicle);
            ArrivalOutcome::Charging(i)
        } else if self.queue.len() < self.queue_capacity {
            self.queue.push_back(vehicle);
            ArrivalOutcome::Enqueued
        } else {
            ArrivalOutcome::Rejected
        }
    }

    pub fn release(&mut self, port: usize) {
        self.ports[port].occupant = None;
    }

    pub fn busy_ports(&self) -> usize {
        self.ports.iter().filter(|p| !p.is_free()).count()
    }
}
