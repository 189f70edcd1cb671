import logging
from datetime import UTC, datetime

from sqlalchemy import (
    BigInteger,
    Column,
    DateTime,
    ForeignKey,
    Integer,
    String,
    Text,
    UniqueConstraint,
)
from sqlalchemy.orm import declarative_base, relationship

logger = logging.getLogger(__name__)

Base = declarative_base()

CACHE_FORMAT = "kypherhound-cache/1"
GRAPH_TABLE_PREFIX = "graph_"


def utcnow():
    return datetime.now(UTC)


class CacheMeta(Base):
    __tablename__ = "kypher_meta"

    key = Column(String(100), primary_key=True)
    value = Column(Text, nullable=False)


class GraphRecord(Base):
    __tablename__ = "kypher_graphs"

    id = Column(Integer, primary_key=True)
    name = Column(String(255), unique=True, nullable=False)
    source_path = Column(Text, nullable=False)
    table_name = Column(String(64), unique=True, nullable=False)
    # Fingerprint of the source at the last import
    size = Column(BigInteger, nullable=False)
    mtime_ns = Column(BigInteger, nullable=False)
    content_hash = Column(String(64), nullable=False)
    # Header columns, tab-joined (column names never contain tabs)
    columns = Column(Text, nullable=False)
    edge_count = Column(BigInteger, default=0)
    imported_at = Column(DateTime, default=utcnow)
    updated_at = Column(DateTime, default=utcnow, onupdate=utcnow)

    indexes = relationship("IndexRecord", back_populates="graph", cascade="all, delete-orphan")

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(self.columns.split("\t"))


class IndexRecord(Base):
    __tablename__ = "kypher_indexes"
    __table_args__ = (UniqueConstraint("graph_id", "column", name="uq_graph_column"),)

    id = Column(Integer, primary_key=True)
    graph_id = Column(Integer, ForeignKey("kypher_graphs.id"), nullable=False)
    column = Column(String(255), nullable=False)
    index_name = Column(String(128), nullable=False)
    created_at = Column(DateTime, default=utcnow)

    graph = relationship("GraphRecord", back_populates="indexes")
