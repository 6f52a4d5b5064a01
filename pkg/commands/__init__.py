from commands import bench, generate, info, solve

__all__ = ["bench", "generate", "info", "solve"]
