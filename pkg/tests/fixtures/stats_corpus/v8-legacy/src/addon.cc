#include <node.h>
#include <v8.h>

void F(const v8::FunctionCallbackInfo<v8::Value>& args) {
  args.GetReturnValue().Set(args[0]);
}

void Init(v8::Local<v8::Object> exports) {
  NODE_SET_METHOD(exports, "f", F);
}
