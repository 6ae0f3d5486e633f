from hypoctrl.simulation._euler import Trajectory, observe, simulate

__all__ = ["Trajectory", "observe", "simulate"]
