// entry: Keys
// category: different APIs (ToObject)
#include <node.h>

void Keys(const v8::FunctionCallbackInfo<v8::Value>& args) {
  v8::Isolate* isolate = args.GetIsolate();
  v8::Local<v8::Context> context = isolate->GetCurrentContext();
  v8::Local<v8::Object> obj = args[0]->ToObject(context).ToLocalChecked();  // sink: tainted
  args.GetReturnValue().Set(obj->GetOwnPropertyNames(context).ToLocalChecked());  // sink: tainted
}
