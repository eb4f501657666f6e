from .simulation_service import SimulationService, simulate

__all__ = ['SimulationService', 'simulate']
