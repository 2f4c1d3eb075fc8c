from grpc import Compression
from opentelemetry import trace
from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor

from ..const import OT_HEADERS, OT_INSECURE
from .shared import get_resource


def setup_tracing(endpoint: str, config_hash: str) -> TracerProvider:
    resource = get_resource(config_hash)

    trace_provider = TracerProvider(resource=resource)

    trace_processor = BatchSpanProcessor(
        OTLPSpanExporter(
            endpoint=endpoint,
            insecure=OT_INSECURE,
            headers=OT_HEADERS,
            compression=Compression.Gzip,
        )
    )

    trace.set_tracer_provider(trace_provider)
    trace_provider.add_span_processor(trace_processor)
    return trace_provider
