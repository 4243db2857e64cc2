#include <nan.h>

using namespace v8;

NAN_METHOD(compressSync) {
  Local<Object> buffer = info[0]->ToObject();
  StreamEncode compressor;
  bool ok = compressor.CopyInputToRingBuffer(node::Buffer::Length(buffer), (uint8_t*) node::Buffer::Data(buffer));
  if (!ok) {
    Nan::ThrowError("Brotli failed to compress.");
    return;
  }
  info.GetReturnValue().Set(compressor.Output());
}

NAN_MODULE_INIT(Init) {
  Nan::SetMethod(target, "compressSync", compressSync);
}

NODE_MODULE(encode, Init)
