from .model_service import KraclModel, build_parameters

__all__ = ["KraclModel", "build_parameters"]
