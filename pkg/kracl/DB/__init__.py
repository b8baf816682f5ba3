from .checkpoint_store import MAGIC, load_checkpoint, save_checkpoint

__all__ = ["MAGIC", "load_checkpoint", "save_checkpoint"]
