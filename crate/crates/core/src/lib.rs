pub mod formulation;
pub mod milp;
pub mod orchestrator;
pub mod report;
pub mod scenario;
pub mod stu;
pub mod synthetic;
