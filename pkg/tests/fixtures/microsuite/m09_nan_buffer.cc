// entry: Hash
// category: different APIs (node::Buffer)
#include <nan.h>
#include <node_buffer.h>

NAN_METHOD(Hash) {
  v8::Local<v8::Object> buf = info[0].As<v8::Object>();  // sink: tainted
  char* data = node::Buffer::Data(buf);  // sink: tainted
  size_t len = node::Buffer::Length(buf);  // sink: tainted
  uint32_t h = 5381;
  for (size_t i = 0; i < len; ++i) h = h * 33 + data[i];
  info.GetReturnValue().Set(Nan::New<v8::Uint32>(h));
}
