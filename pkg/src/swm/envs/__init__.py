"""Environment registry."""

from .base import Env
from .pusht import PushTEnv
from .tworoom import TwoRoomEnv

REGISTRY: dict = {}


def register(env_id: str, ctor):
    REGISTRY[env_id] = ctor


def make(env_id: str) -> Env:
    if env_id not in REGISTRY:
        raise ValueError(f"unknown environment id {env_id!r}; registered ids: {sorted(REGISTRY)}")
    return REGISTRY[env_id]()


register(PushTEnv.ID, PushTEnv)
register(TwoRoomEnv.ID, TwoRoomEnv)

__all__ = ["Env", "PushTEnv", "TwoRoomEnv", "REGISTRY", "register", "make"]
