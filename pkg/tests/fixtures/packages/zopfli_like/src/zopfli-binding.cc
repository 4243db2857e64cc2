#include <nan.h>
#include <node_buffer.h>

using namespace v8;
using namespace node;

NAN_METHOD(CompressBinding::Sync) {
  Local<Object> inbuffer = info[0]->ToObject();
  size_t inbuffersize = Buffer::Length(inbuffer);
  const unsigned char * inbufferdata = (const unsigned char*)Buffer::Data(inbuffer);
  unsigned char* out = 0;
  size_t outsize = 0;
  ZopfliCompress(&options, type, inbufferdata, inbuffersize, &out, &outsize);
  info.GetReturnValue().Set(Nan::NewBuffer((char*)out, outsize).ToLocalChecked());
}

NAN_MODULE_INIT(Init) {
  Nan::Set(target, Nan::New<String>("deflateSync").ToLocalChecked(),
           Nan::GetFunction(Nan::New<FunctionTemplate>(CompressBinding::Sync)).ToLocalChecked());
}

NODE_MODULE(zopfli, Init)
